"""Euler-Maruyama steppers for SA, ISA, KSA and IKSA.

All four methods consume exactly ``dim`` standard normals per step, so one
noise stream can be replayed through every method (common random numbers).
The stepping core works on a batch of replicas with shape ``(R, dim)``; the
single-replica functions are thin wrappers around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DivergenceError
from .landscape import FModifier, drift_factor
from .potentials import Potential
from .schedules import (
    AdaptiveC,
    CoolingSchedule,
    RunMinHistory,
    StepSchedule,
    c_next,
    energy_level_at,
    epsilon_at,
)

METHODS = ("SA", "ISA", "KSA", "IKSA")
ALIASES = {"IASA": "ISA", "IAKSA": "IKSA"}
KINETIC = ("KSA", "IKSA")
OVERFLOW = 1e300

# Normals are generated in chunks of this many steps; block k of a stream is
# row k % CHUNK of chunk k // CHUNK, itself seeded by (base_seed, replica, chunk).
CHUNK = 4096


# -- noise ------------------------------------------------------------------


def _chunk_rng(base_seed: int, replica: int, chunk: int) -> np.random.Generator:
    seq = np.random.SeedSequence([int(base_seed), int(replica), int(chunk)])
    return np.random.Generator(np.random.Philox(seq))


@lru_cache(maxsize=64)
def _chunk(base_seed: int, replica: int, chunk: int, dim: int) -> np.ndarray:
    arr = _chunk_rng(base_seed, replica, chunk).standard_normal((CHUNK, dim))
    arr.setflags(write=False)
    return arr


@dataclass
class NoiseStream:
    base_seed: int
    replica_index: int
    dim: int
    cursor: int = 0

    def block(self, k: int) -> np.ndarray:
        """The k-th block of ``dim`` standard normals (pure in (seed, replica, k))."""
        if k < 0:
            raise ValueError("step index must be non-negative")
        return _chunk(self.base_seed, self.replica_index, k // CHUNK, self.dim)[k % CHUNK].copy()

    def next(self) -> np.ndarray:
        out = self.block(self.cursor)
        self.cursor += 1
        return out


def gaussians(ns: NoiseStream, k: int) -> np.ndarray:
    return ns.block(k)


class NoiseBatch:
    """Blocks for several replicas at once, shape ``(R, dim)`` per step."""

    def __init__(self, base_seed: int, replicas, dim: int):
        self.base_seed = int(base_seed)
        self.replicas = [int(r) for r in replicas]
        self.dim = dim
        self._chunk_id = -1
        self._data: np.ndarray | None = None

    def block(self, k: int) -> np.ndarray:
        cid = k // CHUNK
        if cid != self._chunk_id:
            self._data = np.stack(
                [
                    _chunk_rng(self.base_seed, r, cid).standard_normal((CHUNK, self.dim))
                    for r in self.replicas
                ]
            )
            self._chunk_id = cid
        return self._data[:, k % CHUNK, :]


# -- configuration and state ------------------------------------------------


@dataclass(frozen=True)
class MethodConfig:
    method: str
    modifier: FModifier = field(default_factory=FModifier.zero)
    adaptive_c: AdaptiveC = field(default_factory=AdaptiveC.appendix)
    cooling: CoolingSchedule = field(default_factory=lambda: CoolingSchedule.fixed(2.0))
    steps: StepSchedule = field(default_factory=lambda: StepSchedule(0.05))
    kinetic_form: str = "appendix"  # "appendix" | "theory"

    def __post_init__(self):
        method = ALIASES.get(self.method.upper(), self.method.upper())
        if method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        object.__setattr__(self, "method", method)
        if method in ("SA", "KSA") and not self.modifier.is_zero:
            object.__setattr__(self, "modifier", FModifier.zero())
        if self.kinetic_form not in ("appendix", "theory"):
            raise ConfigError(f"unknown kinetic_form {self.kinetic_form!r}")

    @property
    def kinetic(self) -> bool:
        return self.method in KINETIC

    @property
    def needs_history(self) -> bool:
        return self.adaptive_c.kind == "mollified" or self.cooling.kind == "adaptive"


@dataclass(frozen=True)
class MethodState:
    x: np.ndarray
    y: np.ndarray | None
    theta: float  # elapsed time of the current position
    k: int  # steps taken
    u: float  # U(x), cached
    runmin: float
    runmin_history: RunMinHistory


def initial_state(cfg: MethodConfig, p: Potential, x0, y0=None) -> MethodState:
    x = np.array(x0, dtype=float)
    p._check(x)
    if cfg.kinetic:
        if y0 is None:
            raise ValueError(f"{cfg.method} needs an initial velocity")
        y = np.array(y0, dtype=float)
        if y.shape != x.shape:
            raise ValueError("velocity shape must match position")
    else:
        if y0 is not None:
            raise ValueError(f"{cfg.method} takes no velocity")
        y = None
    u = float(p.energy(x))
    hist = RunMinHistory()
    hist.append(0.0, u)
    return MethodState(x, y, 0.0, 0, u, u, hist)


# -- stepping core ----------------------------------------------------------


def _levels(cfg: MethodConfig, p: Potential, runmin, theta_k: float, histories):
    """c(k) and eps(k) for every replica, evaluated before the step."""
    if cfg.adaptive_c.kind == "mollified":
        c = np.array([c_next(cfg.adaptive_c, None, theta_k, h) for h in histories])
    else:
        c = c_next(cfg.adaptive_c, runmin, theta_k)
    if cfg.cooling.kind == "adaptive":
        energy = np.array(
            [energy_level_at(h, cfg.cooling.n, cfg.cooling.delta2, p.u_min, theta_k) for h in histories]
        )
        eps = epsilon_at(cfg.cooling, theta_k, energy)
    else:
        eps = epsilon_at(cfg.cooling, theta_k)
    return c, eps


def _advance(cfg: MethodConfig, p: Potential, x, y, u, c, eps, eta: float, noise):
    """One Euler-Maruyama step for a batch. Returns (x', y', U(x'))."""
    m = cfg.modifier
    g = p.gradient(x)
    eps_col = eps[:, None] if isinstance(eps, np.ndarray) else eps
    root_eta = math.sqrt(eta)
    if not cfg.kinetic:
        sd = np.sqrt(2.0 * (m.f(u - c) + eps))
        x_new = x - g * eta + (sd * root_eta)[:, None] * noise
        y_new = None
    else:
        # eps * grad H, formed literally as eps * (factor * grad U)
        eps_grad_h = eps_col * (np.asarray(drift_factor(m, c, eps, u))[:, None] * g)
        x_new = x + y * eta
        if cfg.kinetic_form == "appendix":
            y_new = y - y * eta - eps_grad_h * eta + np.sqrt(2.0 * eps_col) * root_eta * noise
        else:
            y_new = y - (y / eps_col) * eta - eps_grad_h * eta + math.sqrt(2.0) * root_eta * noise
    u_new = p.energy(x_new)
    return x_new, y_new, u_new


def _diverged(x, y, u) -> np.ndarray:
    bad = ~np.isfinite(u) | (np.abs(u) > OVERFLOW) | ~np.all(np.isfinite(x), axis=-1)
    if y is not None:
        bad |= ~np.all(np.isfinite(y), axis=-1)
    return bad


@dataclass
class BatchTrajectory:
    """Checkpoint records for R replicas over C checkpoints."""

    steps: np.ndarray  # (C,)
    theta: np.ndarray  # (C,)
    x: np.ndarray  # (R, C, dim)
    u: np.ndarray  # (R, C)
    runmin: np.ndarray  # (R, C)
    failed_at: np.ndarray  # (R,), -1 where the replica stayed finite
    cursor: int  # noise blocks consumed per replica
    final_x: np.ndarray
    final_y: np.ndarray | None
    final_u: np.ndarray
    final_runmin: np.ndarray
    final_theta: float
    histories: list[RunMinHistory]


def simulate_batch(
    cfg: MethodConfig,
    p: Potential,
    x0,
    y0,
    n_steps: int,
    noise: NoiseBatch,
    checkpoints,
    start_step: int = 0,
    theta0: float = 0.0,
    runmin0=None,
    histories: list[RunMinHistory] | None = None,
) -> BatchTrajectory:
    """Run ``n_steps`` steps for every replica in ``noise``.

    A replica whose state becomes non-finite (or |U| > 1e300) is frozen at its
    last finite state and its divergence step recorded in ``failed_at``.
    """
    R = len(noise.replicas)
    x = np.array(np.broadcast_to(np.asarray(x0, dtype=float), (R, p.dim)))
    if cfg.kinetic:
        if y0 is None:
            raise ValueError(f"{cfg.method} needs an initial velocity")
        y = np.array(np.broadcast_to(np.asarray(y0, dtype=float), (R, p.dim)))
    else:
        if y0 is not None:
            raise ValueError(f"{cfg.method} takes no velocity")
        y = None
    u = p.energy(x)
    runmin = u.copy() if runmin0 is None else np.minimum(np.asarray(runmin0, dtype=float), u)
    if histories is None:
        histories = [RunMinHistory() for _ in range(R)]
        for h, v in zip(histories, runmin):
            h.append(theta0, v)

    cps = np.unique(np.asarray(list(checkpoints), dtype=int))
    if cps.size and (cps[0] < 0 or cps[-1] > n_steps):
        raise ValueError("checkpoints must lie in [0, n_steps]")
    C = cps.size
    rec_theta = np.empty(C)
    rec_x = np.empty((R, C, p.dim))
    rec_u = np.empty((R, C))
    rec_min = np.empty((R, C))
    failed_at = np.full(R, -1, dtype=int)
    alive = np.ones(R, dtype=bool)

    theta = theta0
    ci = 0

    def record(j):
        nonlocal ci
        while ci < C and cps[ci] == j:
            rec_theta[ci] = theta
            rec_x[:, ci] = x
            rec_u[:, ci] = u
            rec_min[:, ci] = runmin
            ci += 1

    record(0)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n_steps):
            k = start_step + j
            eta = cfg.steps.at(k)
            theta_k = theta + eta
            c, eps = _levels(cfg, p, runmin, theta_k, histories)
            x_new, y_new, u_new = _advance(cfg, p, x, y, u, c, eps, eta, noise.block(k))
            bad = _diverged(x_new, y_new, u_new) & alive
            if bad.any():
                failed_at[bad] = k
                alive &= ~bad
            if alive.all():
                x, y, u = x_new, y_new, u_new
            else:
                keep = alive[:, None]
                x = np.where(keep, x_new, x)
                if y is not None:
                    y = np.where(keep, y_new, y)
                u = np.where(alive, u_new, u)
            improved = np.flatnonzero(u < runmin)
            if improved.size:
                runmin = np.minimum(runmin, u)
                for r in improved:
                    histories[r].append(theta_k, runmin[r])
            theta = theta_k
            if ci < C and cps[ci] == j + 1:
                record(j + 1)

    return BatchTrajectory(
        steps=cps,
        theta=rec_theta,
        x=rec_x,
        u=rec_u,
        runmin=rec_min,
        failed_at=failed_at,
        cursor=start_step + n_steps,
        final_x=x,
        final_y=y,
        final_u=u,
        final_runmin=runmin,
        final_theta=theta,
        histories=histories,
    )


# -- single-replica API -----------------------------------------------------


def _step(cfg: MethodConfig, p: Potential, st: MethodState, noise) -> MethodState:
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (p.dim,):
        raise ValueError(f"noise must have length {p.dim}")
    eta = cfg.steps.at(st.k)
    theta_k = st.theta + eta
    runmin = np.array([st.runmin])
    c, eps = _levels(cfg, p, runmin, theta_k, [st.runmin_history])
    y = None if st.y is None else st.y[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        x_new, y_new, u_new = _advance(cfg, p, st.x[None, :], y, np.array([st.u]), c, eps, eta, noise[None, :])
    if _diverged(x_new, y_new, u_new)[0]:
        raise DivergenceError(st.k, last_checkpoint=st)
    u1 = float(u_new[0])
    new_min = min(st.runmin, u1)
    if u1 < st.runmin:
        st.runmin_history.append(theta_k, u1)
    return replace(
        st,
        x=x_new[0],
        y=None if y_new is None else y_new[0],
        theta=theta_k,
        k=st.k + 1,
        u=u1,
        runmin=new_min,
    )


def overdamped_step(cfg: MethodConfig, p: Potential, st: MethodState, noise) -> MethodState:
    """Z' = Z - grad U eta + sqrt(2 (f((U-c)_+) + eps)) sqrt(eta) N."""
    if cfg.kinetic:
        raise ValueError(f"overdamped_step called with kinetic method {cfg.method}")
    return _step(cfg, p, st, noise)


def kinetic_step(cfg: MethodConfig, p: Potential, st: MethodState, noise) -> MethodState:
    """Position from the old velocity, then velocity from the old position."""
    if not cfg.kinetic:
        raise ValueError(f"kinetic_step called with overdamped method {cfg.method}")
    if st.y is None:
        raise ValueError("kinetic state needs a velocity")
    return _step(cfg, p, st, noise)


@dataclass
class Trajectory:
    steps: np.ndarray
    theta: np.ndarray
    x: np.ndarray  # (C, dim)
    u: np.ndarray
    runmin: np.ndarray
    final: MethodState

    def rows(self):
        for i, k in enumerate(self.steps):
            yield int(k), float(self.theta[i]), self.x[i].tolist(), float(self.u[i]), float(self.runmin[i])


def simulate(
    cfg: MethodConfig,
    p: Potential,
    x0,
    y0,
    n_steps: int,
    ns: NoiseStream,
    checkpoints=None,
) -> Trajectory:
    """Run one replica from its stream's cursor and advance the cursor by n_steps.

    ``checkpoints`` are step counts in [0, n_steps]; default is every step.
    Raises :class:`DivergenceError` carrying the last finite checkpoint row.
    """
    if ns.dim != p.dim:
        raise ValueError("noise stream dimension does not match the potential")
    if checkpoints is None:
        checkpoints = range(n_steps + 1)
    batch = NoiseBatch(ns.base_seed, [ns.replica_index], ns.dim)
    shifted = _ShiftedNoise(batch, ns.cursor)
    y0_arr = None if y0 is None else np.asarray(y0, dtype=float)
    if cfg.kinetic and y0_arr is None:
        raise ValueError(f"{cfg.method} needs an initial velocity")
    tr = simulate_batch(cfg, p, np.asarray(x0, dtype=float), y0_arr, n_steps, shifted, checkpoints)
    if tr.failed_at[0] >= 0:
        k = int(tr.failed_at[0])
        ok = tr.steps <= k
        last = None
        if ok.any():
            i = int(np.flatnonzero(ok)[-1])
            last = (int(tr.steps[i]), float(tr.theta[i]), tr.x[0, i].copy(), float(tr.u[0, i]))
        ns.cursor += n_steps
        raise DivergenceError(k, last_checkpoint=last)
    ns.cursor += n_steps
    final = MethodState(
        x=tr.final_x[0],
        y=None if tr.final_y is None else tr.final_y[0],
        theta=tr.final_theta,
        k=n_steps,
        u=float(tr.final_u[0]),
        runmin=float(tr.final_runmin[0]),
        runmin_history=tr.histories[0],
    )
    return Trajectory(tr.steps, tr.theta, tr.x[0], tr.u[0], tr.runmin[0], final)


class _ShiftedNoise:
    """Offsets block indices so a stream can resume from its cursor."""

    def __init__(self, batch: NoiseBatch, offset: int):
        self.batch = batch
        self.offset = offset
        self.replicas = batch.replicas

    def block(self, k: int) -> np.ndarray:
        return self.batch.block(k + self.offset)
