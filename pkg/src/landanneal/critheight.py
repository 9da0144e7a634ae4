"""Critical heights of one-dimensional landscapes by exhaustive pair scan.

On the real line the only path from x to y is the segment between them, so
the inf over paths disappears and E_* is a max over grid-index pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import Potential


@dataclass(frozen=True)
class Grid1D:
    xs: np.ndarray
    us: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float).ravel()
        us = np.asarray(self.us, dtype=float).ravel()
        if xs.size != us.size or xs.size < 2:
            raise ValueError("grid needs at least two points and matching x/U lengths")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("grid x values must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "us", us)

    @classmethod
    def sample(cls, p: Potential, lo: float, hi: float, n: int) -> "Grid1D":
        if p.dim != 1:
            raise ValueError(f"{p.name} is not one-dimensional")
        xs = np.linspace(lo, hi, n)
        return cls(xs, p.energy(xs[:, None]))

    def __len__(self) -> int:
        return self.xs.size


@dataclass(frozen=True)
class HeightResult:
    value: float
    pair: tuple[int, int]


def _scan(us: np.ndarray, cap: float | None, c: float | None) -> HeightResult:
    n = us.size
    umin = us.min()
    ends = us if c is None else np.minimum(us, c)
    best, pair = -np.inf, (0, 0)
    for i in range(n):
        top = np.maximum.accumulate(us[i:])
        if cap is not None:
            top = np.minimum(top, cap)
        vals = top - ends[i] - ends[i:] + umin
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, pair = float(vals[j]), (i, i + j)
    return HeightResult(best, pair)


def critical_height(g: Grid1D) -> HeightResult:
    """E_* = max_{i<=j} [max(us[i..j]) - us[i] - us[j] + min(us)]."""
    return _scan(g.us, None, None)


def clipped_critical_height(g: Grid1D, c: float, delta1: float = 0.0) -> HeightResult:
    """c_* = max_{i<=j} [min(max(us[i..j]), c+delta1) - min(us[i],c) - min(us[j],c) + min(us)]."""
    if delta1 < 0:
        raise ValueError("delta1 must be non-negative")
    return _scan(g.us, c + delta1, c)


def read_grid_csv(path) -> Grid1D:
    """Two numeric columns (x, U); a non-numeric first row is treated as a header."""
    import csv

    xs, us = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            try:
                x, u = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1:
                    continue
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
            xs.append(x)
            us.append(u)
    return Grid1D(np.array(xs), np.array(us))
