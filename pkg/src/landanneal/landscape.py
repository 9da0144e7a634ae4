"""State-dependent noise modifier f and the modified landscape H_{eps,c}.

H_{eps,c}(x) = int_{U_min}^{U(x)} du / (f((u-c)_+) + eps) + ln(f((U(x)-c)_+) + eps)

Its gradient is a scalar multiple of grad U, so the improved dynamics never
need the integral itself; ``h_eval`` exists for plotting, densities and tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .potentials import Potential
from .quadrature import ABS_TOL, adaptive_simpson

# quintic smoothstep s(t) = 6t^5 - 15t^4 + 10t^3 has max slope 30/16 at t = 1/2
_SMOOTHSTEP_MAX_SLOPE = 30.0 / 16.0


@dataclass(frozen=True)
class FModifier:
    kind: str = "zero"  # "zero" | "arctan" | "smoothstep"
    scale: float = 0.0  # arctan: f(u) = scale * atan(u)
    m3: float = math.inf  # smoothstep: cap reached at u = m3
    m4: float = 0.0  # smoothstep: cap value

    def __post_init__(self):
        if self.kind not in ("zero", "arctan", "smoothstep"):
            raise ConfigError(f"unknown modifier kind {self.kind!r}")
        if self.kind == "arctan" and not self.scale > 0:
            raise ConfigError("arctan modifier needs a positive scale")
        if self.kind == "smoothstep" and not (self.m3 > 0 and self.m4 > 0 and math.isfinite(self.m3)):
            raise ConfigError("smoothstep modifier needs positive finite M3, M4")

    @classmethod
    def zero(cls) -> "FModifier":
        return cls("zero")

    @classmethod
    def arctan(cls, scale: float = 0.5) -> "FModifier":
        return cls("arctan", scale=scale)

    @classmethod
    def smoothstep(cls, m3: float, m4: float) -> "FModifier":
        return cls("smoothstep", m3=m3, m4=m4)

    @classmethod
    def parse(cls, text: str) -> "FModifier":
        """Parse ``zero``, ``arctan:<scale>`` or ``smoothstep:<M3>:<M4>``."""
        parts = text.strip().lower().split(":")
        try:
            if parts == ["zero"]:
                return cls.zero()
            if parts[0] == "arctan" and len(parts) == 2:
                return cls.arctan(float(parts[1]))
            if parts[0] == "smoothstep" and len(parts) == 3:
                return cls.smoothstep(float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"bad modifier spec {text!r}: {exc}") from None
        raise ConfigError(f"bad modifier spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "arctan":
            return f"arctan:{self.scale:g}"
        if self.kind == "smoothstep":
            return f"smoothstep:{self.m3:g}:{self.m4:g}"
        return "zero"

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    @property
    def m5(self) -> float:
        """sup of f' on [0, M3]."""
        if self.kind == "arctan":
            return self.scale
        if self.kind == "smoothstep":
            return self.m4 * _SMOOTHSTEP_MAX_SLOPE / self.m3
        return 0.0

    @property
    def sup(self) -> float:
        if self.kind == "arctan":
            return self.scale * math.pi / 2.0
        return self.m4 if self.kind == "smoothstep" else 0.0

    def f(self, u):
        """f(u), with f = 0 for u <= 0. Accepts scalars or arrays."""
        if self.kind == "zero":
            return np.zeros_like(u, dtype=float) if isinstance(u, np.ndarray) else 0.0
        v = np.maximum(u, 0.0)
        if self.kind == "arctan":
            return self.scale * np.arctan(v)
        t = np.minimum(v / self.m3, 1.0)
        return self.m4 * t * t * t * (t * (6.0 * t - 15.0) + 10.0)

    def fprime(self, u):
        """Right derivative of f; zero for u < 0."""
        if self.kind == "zero":
            return np.zeros_like(u, dtype=float) if isinstance(u, np.ndarray) else 0.0
        neg = np.asarray(u) < 0.0
        v = np.maximum(u, 0.0)
        if self.kind == "arctan":
            out = self.scale / (1.0 + v * v)
        else:
            t = np.minimum(v / self.m3, 1.0)
            out = self.m4 / self.m3 * 30.0 * t * t * (1.0 - t) * (1.0 - t)
        return np.where(neg, 0.0, out) if isinstance(out, np.ndarray) else (0.0 if neg else float(out))


def f_eval(m: FModifier, u):
    return m.f(u)


def f_prime(m: FModifier, u):
    return m.fprime(u)


def drift_factor(m: FModifier, c, epsilon, u):
    """(1 + f'((u-c)_+)) / (f((u-c)_+) + eps), the f' term only where u > c.

    Below c, H is (U - U_min)/eps + ln(eps) and its slope in U is exactly
    1/eps; for kinds with f'(0) != 0 (arctan) the factor jumps at u = c.
    """
    s = np.subtract(u, c)
    above = s > 0.0
    num = 1.0 + np.where(above, m.fprime(s), 0.0)
    den = m.f(s) + epsilon
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ModifiedLandscape:
    potential: Potential
    modifier: FModifier
    c: float
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def modified_drift(L: ModifiedLandscape, x) -> np.ndarray:
    """grad_x H_{eps,c}(x) = drift_factor(U(x)) * grad U(x)."""
    x = np.asarray(x, dtype=float)
    u = L.potential.energy(L.potential._check(x))
    k = drift_factor(L.modifier, L.c, L.epsilon, u)
    return np.asarray(k)[..., None] * L.potential.gradient(x)


def _integrand(L: ModifiedLandscape):
    m, eps = L.modifier, L.epsilon
    if m.kind == "arctan":
        a = m.scale
        return lambda s: 1.0 / (a * math.atan(s) + eps) if s > 0.0 else 1.0 / eps
    return lambda s: 1.0 / (float(m.f(s)) + eps)


def _h_from_u(L: ModifiedLandscape, u: float, tol: float = ABS_TOL) -> float:
    eps, c, u_min = L.epsilon, L.c, L.potential.u_min
    if L.modifier.is_zero or u <= c:
        return (u - u_min) / eps + math.log(eps)
    lo = max(c, u_min)
    integral = (lo - u_min) / eps + adaptive_simpson(_integrand(L), lo - c, u - c, tol=tol)
    return integral + math.log(float(L.modifier.f(u - c)) + eps)


def h_eval(L: ModifiedLandscape, x, tol: float = ABS_TOL) -> float:
    """H_{eps,c}(x) for a single point."""
    u = L.potential.eval(x)
    return _h_from_u(L, float(u), tol)


def h_of_u(L: ModifiedLandscape, us, tol: float = ABS_TOL) -> np.ndarray:
    """H as a function of energy values, vectorised over ``us``.

    Energies above ``max(c, U_min)`` are sorted and the integral accumulated
    piece by piece between consecutive levels, so each piece is short and the
    result is monotone in U by construction.
    """
    us = np.asarray(us, dtype=float)
    flat = us.ravel()
    eps, c, u_min = L.epsilon, L.c, L.potential.u_min
    out = (flat - u_min) / eps + math.log(eps)
    if L.modifier.is_zero:
        return out.reshape(us.shape)

    lo = max(c, u_min)
    fn = _integrand(L)
    hi_idx = np.flatnonzero(flat > lo)
    order = hi_idx[np.argsort(flat[hi_idx], kind="stable")]
    acc = (lo - u_min) / eps
    prev = lo - c
    for i in order:
        s = flat[i] - c
        acc += adaptive_simpson(fn, prev, s, tol=tol)
        prev = s
        out[i] = acc + math.log(float(L.modifier.f(s)) + eps)
    # c < U <= U_min only happens when the stored U_min is not a true minimum
    for i in np.flatnonzero((flat > c) & (flat <= lo)):
        out[i] = _h_from_u(L, float(flat[i]), tol)
    return out.reshape(us.shape)


@dataclass(frozen=True)
class LandscapeTable:
    x: np.ndarray
    u: np.ndarray
    h: np.ndarray

    def rows(self):
        return zip(self.x.tolist(), self.u.tolist(), self.h.tolist())


def landscape_grid(L: ModifiedLandscape, xs) -> LandscapeTable:
    """Aligned samples of U and H on a 1D grid."""
    if L.potential.dim != 1:
        raise ValueError("landscape_grid needs a one-dimensional potential")
    xs = np.asarray(xs, dtype=float).ravel()
    u = L.potential.energy(xs[:, None])
    return LandscapeTable(xs, u, h_of_u(L, u))


def sign_change_cells(values) -> np.ndarray:
    """Indices i where the forward difference changes sign between cells i and i+1."""
    d = np.sign(np.diff(np.asarray(values, dtype=float)))
    return np.flatnonzero(d[:-1] != d[1:])
