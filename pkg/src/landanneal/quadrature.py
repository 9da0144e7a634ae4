"""Adaptive Simpson quadrature on a scalar integrand."""

from __future__ import annotations

from typing import Callable

from .errors import QuadratureError

ABS_TOL = 1e-10
MAX_DEPTH = 60
MAX_INTERVALS = 200_000


def adaptive_simpson(
    fn: Callable[[float], float],
    a: float,
    b: float,
    tol: float = ABS_TOL,
    max_depth: int = MAX_DEPTH,
    max_intervals: int = MAX_INTERVALS,
) -> float:
    """Integrate ``fn`` over [a, b] to absolute tolerance ``tol``.

    Intervals are refined until the two-half Simpson estimate agrees with the
    whole-interval one to ``15 * tol_local``; the accepted value carries the
    Richardson correction. Exceeding ``max_depth`` on any branch or
    ``max_intervals`` overall raises :class:`QuadratureError` with the sum
    accumulated so far.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    visited = 0
    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, tol_i, depth = stack.pop()
        visited += 1
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        if abs(err) <= 15.0 * tol_i:
            total += left + right + err / 15.0
            continue
        if depth >= max_depth or visited >= max_intervals:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{a!r}, {b!r}]", sign * total
            )
        stack.append((m, b, fm, frm, fb, right, 0.5 * tol_i, depth + 1))
        stack.append((a, m, fa, flm, fm, left, 0.5 * tol_i, depth + 1))
    return sign * total
