"""Multi-replica experiments with common random numbers.

Replica ``r`` of every method reads the same noise stream ``(base_seed, r)``,
so method comparisons are paired replica by replica.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DivergenceError
from .gibbs import density_1d, histogram_on_cells, tv_distance
from .integrators import MethodConfig, NoiseBatch, simulate_batch
from .landscape import FModifier
from .potentials import Potential, get_potential
from .schedules import AdaptiveC, CoolingSchedule, StepSchedule

CSV_HEADER = ("method", "theta", "p_inst", "p_runmin")


@dataclass(frozen=True)
class ExperimentConfig:
    potential: str
    methods: dict[str, MethodConfig]
    x0: tuple[float, ...]
    y0: tuple[float, ...] | None = None  # defaults to zeros for kinetic methods
    n_replicas: int = 100
    n_steps: int = 10_000
    checkpoints: tuple[int, ...] | None = None  # step counts; default log-spaced in theta
    n_checkpoints: int = 60
    delta: float = 0.5
    base_seed: int = 0
    time_axis: str = "theta"  # "theta" | "step"
    workers: int = 1

    def __post_init__(self):
        try:
            p = get_potential(self.potential)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        if not self.methods:
            raise ConfigError("at least one method is required")
        if self.n_replicas < 1:
            raise ConfigError("n_replicas must be >= 1")
        if self.n_steps < 0:
            raise ConfigError("n_steps must be >= 0")
        if len(self.x0) != p.dim:
            raise ConfigError(f"x0 has length {len(self.x0)}, {p.name} has dimension {p.dim}")
        if self.y0 is not None and len(self.y0) != p.dim:
            raise ConfigError(f"y0 has length {len(self.y0)}, {p.name} has dimension {p.dim}")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.time_axis not in ("theta", "step"):
            raise ConfigError("time_axis must be 'theta' or 'step'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.checkpoints is not None:
            cps = list(self.checkpoints)
            if cps != sorted(cps) or (cps and (cps[0] < 0 or cps[-1] > self.n_steps)):
                raise ConfigError("checkpoints must be sorted and within [0, n_steps]")

    @property
    def target(self) -> Potential:
        return get_potential(self.potential)

    def checkpoint_steps(self) -> np.ndarray:
        if self.checkpoints is not None:
            return np.unique(np.asarray(self.checkpoints, dtype=int))
        first = next(iter(self.methods.values()))
        return log_checkpoints(first.steps, self.n_steps, self.n_checkpoints)


def log_checkpoints(steps: StepSchedule, n_steps: int, n_points: int = 60) -> np.ndarray:
    """Step counts nearest to ``n_points`` log-spaced theta targets, plus 0 and n_steps."""
    if n_steps == 0:
        return np.array([0])
    thetas = steps.thetas(n_steps)  # time after j+1 steps
    targets = np.logspace(math.log10(thetas[0]), math.log10(thetas[-1]), n_points)
    idx = np.searchsorted(thetas, targets)
    idx = np.clip(idx, 0, n_steps - 1)
    lower = np.clip(idx - 1, 0, n_steps - 1)
    nearer = np.where(np.abs(thetas[lower] - targets) < np.abs(thetas[idx] - targets), lower, idx)
    return np.unique(np.concatenate([[0], nearer + 1, [n_steps]]))


@dataclass
class ReplicaOutcome:
    """Per-replica indicators for one method, replicas sorted by index."""

    method: str
    replicas: np.ndarray
    steps: np.ndarray
    theta: np.ndarray
    inst_fail: np.ndarray  # (R, C) bool
    runmin_fail: np.ndarray  # (R, C) bool
    failed_at: np.ndarray  # (R,)
    cursor: int


@dataclass
class ProbabilityCurve:
    method: str
    theta: np.ndarray
    p_inst: np.ndarray
    p_runmin: np.ndarray
    n_replicas: int
    n_diverged: int = 0
    steps: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def rows(self):
        return zip(self.theta.tolist(), self.p_inst.tolist(), self.p_runmin.tolist())


def _run_block(cfg: ExperimentConfig, label: str, replicas: list[int]) -> ReplicaOutcome:
    p = cfg.target
    mcfg = cfg.methods[label]
    cps = cfg.checkpoint_steps()
    y0 = None
    if mcfg.kinetic:
        y0 = np.zeros(p.dim) if cfg.y0 is None else np.asarray(cfg.y0, dtype=float)
    tr = simulate_batch(
        mcfg, p, np.asarray(cfg.x0, dtype=float), y0, cfg.n_steps,
        NoiseBatch(cfg.base_seed, replicas, p.dim), cps,
    )
    level = p.u_min + cfg.delta
    inst = tr.u > level
    # a replica counts as failed at every checkpoint after its divergence step;
    # its running minimum keeps the values observed before divergence
    diverged = (tr.failed_at[:, None] >= 0) & (tr.steps[None, :] > tr.failed_at[:, None])
    inst |= diverged
    theta = tr.theta if cfg.time_axis == "theta" else tr.steps.astype(float)
    return ReplicaOutcome(
        label, np.asarray(replicas), tr.steps, theta, inst, tr.runmin > level, tr.failed_at, tr.cursor
    )


def _merge(parts: list[ReplicaOutcome]) -> ReplicaOutcome:
    parts = sorted(parts, key=lambda o: int(o.replicas[0]))
    first = parts[0]
    return ReplicaOutcome(
        first.method,
        np.concatenate([o.replicas for o in parts]),
        first.steps,
        first.theta,
        np.concatenate([o.inst_fail for o in parts]),
        np.concatenate([o.runmin_fail for o in parts]),
        np.concatenate([o.failed_at for o in parts]),
        first.cursor,
    )


def run_replicas(cfg: ExperimentConfig) -> dict[str, ReplicaOutcome]:
    """Simulate every (method, replica) pair; replica r uses stream (base_seed, r)."""
    replicas = list(range(cfg.n_replicas))
    n_blocks = min(cfg.workers, cfg.n_replicas)
    blocks = [b.tolist() for b in np.array_split(replicas, n_blocks)]
    jobs = [(label, b) for label in cfg.methods for b in blocks]
    if cfg.workers == 1:
        results = [_run_block(cfg, label, b) for label, b in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_block, cfg, label, b) for label, b in jobs]
            results = [f.result() for f in futures]
    out: dict[str, list[ReplicaOutcome]] = {}
    for res in results:
        out.setdefault(res.method, []).append(res)
    return {label: _merge(parts) for label, parts in out.items()}


def curves_from_outcomes(outcomes: dict[str, ReplicaOutcome], first: int | None = None) -> list[ProbabilityCurve]:
    """Proportions over all replicas, or only the first ``first`` of them."""
    curves = []
    for label, o in outcomes.items():
        sel = slice(None) if first is None else slice(0, first)
        inst, runmin = o.inst_fail[sel], o.runmin_fail[sel]
        curves.append(
            ProbabilityCurve(
                label,
                o.theta.copy(),
                inst.mean(axis=0),
                runmin.mean(axis=0),
                n_replicas=inst.shape[0],
                n_diverged=int((o.failed_at[sel] >= 0).sum()),
                steps=o.steps.copy(),
            )
        )
    return sorted(curves, key=lambda c: c.method)


def run_experiment(cfg: ExperimentConfig) -> list[ProbabilityCurve]:
    return curves_from_outcomes(run_replicas(cfg))


def write_csv(curves, path) -> Path:
    """Write ``method,theta,p_inst,p_runmin`` rows sorted by (method, theta)."""
    path = Path(path)
    rows = sorted(
        (c.method, t, pi, pr) for c in curves for t, pi, pr in c.rows()
    )
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for method, t, pi, pr in rows:
                w.writerow([method, f"{t:.17g}", f"{pi:.17g}", f"{pr:.17g}"])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    return path


def stationarity_test(
    p: Potential,
    m: FModifier,
    c: float,
    epsilon: float,
    n_steps: int,
    burn_in: int,
    seed: int,
    grid,
    eta: float = 0.005,
    x0=None,
) -> float:
    """TV distance between a fixed-temperature ISA histogram and the grid density.

    Positions X(burn_in), ..., X(burn_in + n_steps) are binned on the grid's
    cells. For periodic potentials the positions are wrapped onto one period
    starting at the first grid node (the grid should span exactly one period).
    """
    if p.dim != 1:
        raise ValueError("stationarity_test needs a one-dimensional potential")
    xs = np.asarray(grid, dtype=float)
    cfg = MethodConfig(
        "ISA",
        modifier=m,
        adaptive_c=AdaptiveC.fixed(c),
        cooling=CoolingSchedule.constant(epsilon),
        steps=StepSchedule(eta, 1, 1.0),
    )
    start = np.asarray(p.argmin_hint[0] if x0 is None else np.atleast_1d(x0), dtype=float)
    total = burn_in + n_steps
    tr = simulate_batch(cfg, p, start, None, total, NoiseBatch(seed, [0], 1), range(burn_in, total + 1))
    if tr.failed_at[0] >= 0:
        raise DivergenceError(int(tr.failed_at[0]))
    probs, outside = histogram_on_cells(tr.x[0, :, 0], xs, p.period)
    return tv_distance(probs, density_1d(p, m, c, epsilon, xs), outside)
