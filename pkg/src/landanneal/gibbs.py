"""Grid quadrature of the modified Gibbs law mu ~ exp(-H_{eps,c}) in 1D."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .critheight import Grid1D
from .errors import DensityUnderflowError
from .landscape import FModifier, ModifiedLandscape, h_of_u
from .potentials import Potential


def _node_widths(xs: np.ndarray) -> np.ndarray:
    """Trapezoid weights per node, equal to the node's Voronoi cell width."""
    w = np.empty_like(xs)
    d = np.diff(xs)
    w[0] = d[0] / 2
    w[-1] = d[-1] / 2
    w[1:-1] = (d[:-1] + d[1:]) / 2
    return w


def cell_edges(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    return np.concatenate([[xs[0]], 0.5 * (xs[:-1] + xs[1:]), [xs[-1]]])


@dataclass(frozen=True)
class DensityGrid:
    grid: Grid1D
    weights: np.ndarray  # cell masses, sum to 1
    h: np.ndarray  # H at the nodes
    density: np.ndarray  # normalised pointwise density


@dataclass(frozen=True)
class ProductLaw:
    x_marginal: DensityGrid
    velocity_variance: float

    def __post_init__(self):
        if not self.velocity_variance > 0:
            raise ValueError("velocity variance must be positive")


def density_1d(p: Potential, m: FModifier, c: float, epsilon: float, xs) -> DensityGrid:
    """mu_eps^f on the grid, built in log domain with max subtraction."""
    if p.dim != 1:
        raise ValueError(f"{p.name} is not one-dimensional")
    L = ModifiedLandscape(p, m, c, epsilon)
    g = Grid1D(np.asarray(xs, dtype=float), p.energy(np.asarray(xs, dtype=float)[:, None]))
    h = h_of_u(L, g.us)
    logd = -h
    if not np.isfinite(logd.max()):
        raise DensityUnderflowError(
            "log-density is not finite anywhere on the grid; try a larger epsilon"
        )
    logd = logd - logd.max()
    dens = np.exp(logd)
    mass = dens * _node_widths(g.xs)
    total = mass.sum()
    if not (np.isfinite(total) and total > 0):
        raise DensityUnderflowError(
            "density has zero or non-finite mass on the grid; try a larger epsilon"
        )
    weights = mass / total
    return DensityGrid(g, weights, h, dens / total)


def tail_mass(d: DensityGrid, p: Potential, delta: float) -> float:
    """Mass of nodes with U > U_min + delta."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return float(d.weights[d.grid.us > p.u_min + delta].sum())


def sample_product(law: ProductLaw, n: int, seed=None) -> np.ndarray:
    """``(n, 2)`` array of (x, y): x by inverse transform on cell masses (uniform
    inside the cell), y ~ N(0, eps) independently."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    d = law.x_marginal
    edges = cell_edges(d.grid.xs)
    cdf = np.cumsum(d.weights)
    cdf[-1] = 1.0
    cells = np.searchsorted(cdf, rng.random(n), side="right")
    cells = np.minimum(cells, cdf.size - 1)
    lo, hi = edges[cells], edges[cells + 1]
    x = lo + (hi - lo) * rng.random(n)
    y = rng.normal(0.0, np.sqrt(law.velocity_variance), n)
    return np.column_stack([x, y])


def histogram_on_cells(samples, xs, period: float | None = None) -> tuple[np.ndarray, float]:
    """Empirical cell probabilities for the grid's cells plus the mass outside.

    With ``period`` the samples are wrapped into ``[xs[0], xs[0] + period)``.
    """
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("no samples")
    xs = np.asarray(xs, dtype=float)
    if period is not None:
        s = xs[0] + np.mod(s - xs[0], period)
    edges = cell_edges(xs)
    idx = np.searchsorted(edges, s, side="right") - 1
    # the top edge belongs to the last cell
    idx[s == edges[-1]] = xs.size - 1
    inside = (idx >= 0) & (idx < xs.size)
    counts = np.bincount(idx[inside], minlength=xs.size).astype(float)
    return counts / s.size, float(1.0 - inside.sum() / s.size)


def tv_distance(probs, d: DensityGrid, outside: float = 0.0) -> float:
    """0.5 * sum |p - q| over cells; ``outside`` is empirical mass off the grid."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape != d.weights.shape:
        raise ValueError(f"histogram has {probs.size} cells, density has {d.weights.size}")
    return float(0.5 * (np.abs(probs - d.weights).sum() + outside))
