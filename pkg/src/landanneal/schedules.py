"""Stepsize, cooling and adaptive-level schedules.

Time is the cumulative stepsize ``theta(k) = sum_{s<=k} eta(s)``. Two families of
adaptive rule are provided: the discrete one used for experiments
(``c = runmin + 1/(theta+1)``) and the mollified convolution of the running
minimum, which is smooth in time.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import ConfigError


@dataclass(frozen=True)
class StepSchedule:
    eta0: float
    decay_every: int = 1000
    decay_factor: float = 0.999

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ConfigError("eta0 must be positive")
        if self.decay_every < 1:
            raise ConfigError("decay_every must be a positive integer")
        if not 0.0 < self.decay_factor <= 1.0:
            raise ConfigError("decay_factor must lie in (0, 1]")

    def at(self, k: int) -> float:
        return self.eta0 * self.decay_factor ** (k // self.decay_every)

    def thetas(self, n_steps: int) -> np.ndarray:
        """theta after each of the first ``n_steps`` steps (``theta[k] = sum_{s<=k} eta(s)``)."""
        out = np.empty(n_steps)
        theta = 0.0
        for k in range(n_steps):
            theta += self.at(k)
            out[k] = theta
        return out


def step_at(s: StepSchedule, k: int) -> float:
    return s.at(k)


@dataclass(frozen=True)
class CoolingSchedule:
    """``fixed``: E/ln(theta+offset); ``adaptive``: E_t/ln(theta+offset) with
    E_t from the mollified running minimum; ``constant``: eps for all times."""

    kind: str = "fixed"
    energy: float = 1.0  # fixed: E; constant: eps itself
    offset: float = 2.0
    delta2: float = 0.0  # adaptive only
    n: int = 1  # adaptive only: mollifier width 1/n

    def __post_init__(self):
        if self.kind not in ("fixed", "adaptive", "constant"):
            raise ConfigError(f"unknown cooling kind {self.kind!r}")
        if self.kind in ("fixed", "constant") and not self.energy > 0:
            raise ConfigError("cooling energy must be positive")
        if self.kind == "adaptive" and not (self.delta2 > 0 and self.n >= 1):
            raise ConfigError("adaptive cooling needs delta2 > 0 and n >= 1")
        if self.kind != "constant" and not self.offset >= 1.0:
            raise ConfigError("cooling offset must be >= 1 so that ln(theta+offset) > 0 for theta > 0")

    @classmethod
    def fixed(cls, energy: float, offset: float = 2.0) -> "CoolingSchedule":
        return cls("fixed", energy=energy, offset=offset)

    @classmethod
    def adaptive(cls, delta2: float, n: int, offset: float = 2.0) -> "CoolingSchedule":
        return cls("adaptive", delta2=delta2, n=n, offset=offset)

    @classmethod
    def constant(cls, epsilon: float) -> "CoolingSchedule":
        return cls("constant", energy=epsilon)

    @classmethod
    def parse(cls, text: str) -> "CoolingSchedule":
        """``fixed:<E>[:<offset>]``, ``adaptive:<delta2>:<n>[:<offset>]`` or ``constant:<eps>``."""
        parts = text.strip().lower().split(":")
        try:
            if parts[0] == "fixed" and len(parts) in (2, 3):
                return cls.fixed(float(parts[1]), *(float(p) for p in parts[2:]))
            if parts[0] == "adaptive" and len(parts) in (3, 4):
                return cls.adaptive(float(parts[1]), int(parts[2]), *(float(p) for p in parts[3:]))
            if parts[0] == "constant" and len(parts) == 2:
                return cls.constant(float(parts[1]))
        except ValueError as exc:
            raise ConfigError(f"bad cooling spec {text!r}: {exc}") from None
        raise ConfigError(f"bad cooling spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.energy:g}:{self.offset:g}"
        if self.kind == "adaptive":
            return f"adaptive:{self.delta2:g}:{self.n}:{self.offset:g}"
        return f"constant:{self.energy:g}"


def epsilon_at(c: CoolingSchedule, theta: float, energy_override=None):
    """Temperature at time theta. ``energy_override`` supplies E_t for the
    adaptive kind (scalar or per-replica array)."""
    if c.kind == "constant":
        return c.energy
    arg = theta + c.offset
    if not arg > 1.0:
        raise ValueError(f"theta + offset must exceed 1, got {arg!r}")
    if c.kind == "fixed":
        return c.energy / math.log(arg)
    if energy_override is None:
        raise ValueError("adaptive cooling needs the current energy level")
    if np.any(np.asarray(energy_override) <= 0):
        raise ValueError("energy level must be positive")
    return energy_override / math.log(arg)


@dataclass
class RunMinHistory:
    """Right-continuous step function of the running minimum.

    Samples are only appended when the minimum strictly decreases, so
    consecutive entries always differ and times strictly increase.
    """

    times: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def append(self, t: float, value: float) -> None:
        if self.times:
            if value >= self.values[-1]:
                return
            if t <= self.times[-1]:
                if t == self.times[-1]:
                    self.values[-1] = value
                    return
                raise ValueError("history times must increase")
        self.times.append(float(t))
        self.values.append(float(value))

    def __len__(self) -> int:
        return len(self.times)

    def at(self, t: float) -> float:
        """M_t, extended constant before the first and after the last sample."""
        if not self.times:
            raise ValueError("empty running-minimum history")
        i = bisect.bisect_right(self.times, t) - 1
        return self.values[max(i, 0)]


@dataclass(frozen=True)
class AdaptiveC:
    kind: str = "appendix"  # "fixed" | "appendix" | "mollified"
    c: float = 0.0  # fixed only
    n: int = 1  # mollified only
    delta1: float = 0.0  # mollified only; enters the clipped-height bound, not c itself

    def __post_init__(self):
        if self.kind not in ("fixed", "appendix", "mollified"):
            raise ConfigError(f"unknown adaptive_c kind {self.kind!r}")
        if self.kind == "mollified" and (self.n < 1 or self.delta1 < 0):
            raise ConfigError("mollified adaptive_c needs n >= 1 and delta1 >= 0")

    @classmethod
    def fixed(cls, c: float) -> "AdaptiveC":
        return cls("fixed", c=c)

    @classmethod
    def appendix(cls) -> "AdaptiveC":
        return cls("appendix")

    @classmethod
    def mollified(cls, n: int, delta1: float = 0.0) -> "AdaptiveC":
        return cls("mollified", n=n, delta1=delta1)

    @classmethod
    def parse(cls, text: str) -> "AdaptiveC":
        """``fixed:<c>``, ``appendix`` or ``mollified:<n>:<delta1>``."""
        parts = text.strip().lower().split(":")
        try:
            if parts[0] == "fixed" and len(parts) == 2:
                return cls.fixed(float(parts[1]))
            if parts == ["appendix"]:
                return cls.appendix()
            if parts[0] == "mollified" and len(parts) == 3:
                return cls.mollified(int(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"bad adaptive_c spec {text!r}: {exc}") from None
        raise ConfigError(f"bad adaptive_c spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.c:g}"
        if self.kind == "mollified":
            return f"mollified:{self.n}:{self.delta1:g}"
        return "appendix"


def c_next(a: AdaptiveC, runmin, theta: float, history: RunMinHistory | None = None):
    """Level c at time theta given the running minimum (scalar or array)."""
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if a.kind == "fixed":
        return a.c
    if a.kind == "appendix":
        return runmin + 1.0 / (theta + 1.0)
    if history is None:
        raise ValueError("mollified adaptive_c needs the running-minimum history")
    return mollified_runmin(history, a.n, 1, theta)


# -- mollifier --------------------------------------------------------------


def _bump(x: float) -> float:
    return math.exp(1.0 / (x * x - 1.0)) if -1.0 < x < 1.0 else 0.0


_MOLLIFIER_Z = integrate.quad(_bump, -1.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)[0]


def mollifier_phi(x: float) -> float:
    """Normalised bump exp(1/(x^2-1))/Z on (-1, 1), zero elsewhere."""
    return _bump(x) / _MOLLIFIER_Z


def mollifier_normaliser() -> float:
    return _MOLLIFIER_Z


@lru_cache(maxsize=4096)
def _phi_cdf(z: float) -> float:
    if z <= -1.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    if z <= 0.0:
        return integrate.quad(mollifier_phi, -1.0, z, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    return 1.0 - _phi_cdf(-z)


def mollified_runmin(h: RunMinHistory, n: int, lag_steps: int, t: float) -> float:
    """(phi_{1/n} * M_{(. - lag/n)_+})(t).

    Substituting s = n(t - u) gives int_{-1}^{1} M((t - (s + lag)/n)_+) phi(s) ds;
    M is piecewise constant, so the integral splits at the jump times into
    pieces weighted by the mollifier's cumulative mass (each by quadrature).
    """
    if not len(h):
        raise ValueError("empty running-minimum history")
    if n < 1 or lag_steps < 0:
        raise ValueError("need n >= 1 and lag_steps >= 0")
    # tau(s) = t - (s + lag)/n decreases in s; jump at tau_j <=> s_j = n(t - tau_j) - lag
    lo_tau = t - (1.0 + lag_steps) / n
    hi_tau = t - (lag_steps - 1.0) / n
    cuts = [n * (t - tj) - lag_steps for tj in h.times if lo_tau < tj < hi_tau]
    edges = [-1.0] + sorted(c for c in cuts if -1.0 < c < 1.0) + [1.0]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        tau = max(t - (mid + lag_steps) / n, 0.0)
        total += h.at(tau) * (_phi_cdf(b) - _phi_cdf(a))
    return total


def energy_level_at(h: RunMinHistory, n: int, delta2: float, u_min: float, t: float) -> float:
    """E_t = (phi_{1/n} * M_{(. - 3/n)_+})(t) - U_min + delta2."""
    if not delta2 > 0:
        raise ValueError("delta2 must be positive")
    return mollified_runmin(h, n, 3, t) - u_min + delta2
