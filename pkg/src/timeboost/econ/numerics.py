"""Small numerical kernel shared by the equilibrium solvers.

Deliberately self-contained: adaptive Simpson quadrature, a fixed-step RK4
path integrator, and bracketed bisection.  Keeping these in-repo makes the
solvers' accuracy characteristics explicit and the acceptance tolerances
reproducible.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


def _simpson(f: Callable[[float], float], a: float, fa: float, b: float, fb: float) -> tuple[float, float, float]:
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 48,
) -> float:
    """Integrate f over [a, b] with adaptive interval bisection."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)

    def rec(a: float, fa: float, b: float, fb: float, m: float, fm: float,
            whole: float, tol: float, depth: int) -> float:
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (
            rec(a, fa, m, fm, lm, flm, left, tol / 2.0, depth + 1)
            + rec(m, fm, b, fb, rm, frm, right, tol / 2.0, depth + 1)
        )

    return rec(a, fa, b, fb, m, fm, whole, tol, 0)


def cumulative_integral(
    f: Callable[[float], float],
    xs: Sequence[float],
    tol: float = 1e-11,
) -> np.ndarray:
    """Cumulative integral of f along the grid xs (adaptive per segment)."""
    xs = np.asarray(xs, dtype=float)
    out = np.empty_like(xs)
    out[0] = 0.0
    for i in range(1, len(xs)):
        out[i] = out[i - 1] + adaptive_simpson(f, xs[i - 1], xs[i], tol=tol)
    return out


def rk4_path(
    deriv: Callable[[float, float], float],
    x0: float,
    y0: float,
    xs: Sequence[float],
    h_max: float = 1e-3,
) -> np.ndarray:
    """Integrate dy/dx = deriv(x, y) from (x0, y0) through the points xs.

    Every requested x is hit exactly (no interpolation); segments longer
    than h_max are split into equal sub-steps.
    """
    ys = np.empty(len(xs))
    x, y = x0, y0
    for i, target in enumerate(xs):
        if target < x:
            raise ValueError("rk4_path targets must be non-decreasing and >= x0")
        span = target - x
        if span > 0:
            steps = max(1, math.ceil(span / h_max))
            h = span / steps
            for _ in range(steps):
                k1 = deriv(x, y)
                k2 = deriv(x + 0.5 * h, y + 0.5 * h * k1)
                k3 = deriv(x + 0.5 * h, y + 0.5 * h * k2)
                k4 = deriv(x + h, y + h * k3)
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                x += h
            x = target
        ys[i] = y
    return ys


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-13,
    max_iter: int = 200,
) -> float:
    """Root of f on [lo, hi]; f(lo) and f(hi) must bracket zero."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"root not bracketed on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) < tol:
            return mid
        if flo * fm < 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def simpson_on_grid(ys: Sequence[float], xs: Sequence[float]) -> float:
    """Composite Simpson on an (odd-length, uniform-ish) grid; falls back to
    trapezoid on the last interval when the point count is even."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = len(xs)
    if n < 2:
        return 0.0
    total = 0.0
    i = 0
    while i + 2 < n:
        h1 = xs[i + 1] - xs[i]
        h2 = xs[i + 2] - xs[i + 1]
        # Simpson for possibly unequal spacing
        h = h1 + h2
        if h1 <= 0 or h2 <= 0:
            i += 1
            continue
        total += (h / 6.0) * (
            ys[i] * (2.0 - h2 / h1)
            + ys[i + 1] * (h * h / (h1 * h2))
            + ys[i + 2] * (2.0 - h1 / h2)
        )
        i += 2
    if i + 1 < n:
        total += 0.5 * (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1])
    return float(total)
