"""Adaptive Simpson quadrature used where scipy.integrate.quad is awkward.

The radial error-term integrals mix a smooth integrand with a piecewise
constant weight, so the interval is split at the weight's jump points and
each smooth piece is integrated separately.
"""
from __future__ import annotations

from typing import Callable

import numpy as np


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 50) -> float:
    """Integrate f on [a, b] by recursive interval-halving Simpson.

    The error estimate is the standard |S2 - S1| / 15 Richardson term.
    """
    if b <= a:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return (_simpson_rec(f, a, m, fa, flm, fm, left, half, depth - 1)
            + _simpson_rec(f, m, b, fm, frm, fb, right, half, depth - 1))


def piecewise_step_integral(f_vec: Callable[[np.ndarray], np.ndarray],
                            breaks: np.ndarray, weights: np.ndarray,
                            tol: float = 1e-10) -> float:
    """Integrate f(r) * w(r) where w is constant on each (breaks[i], breaks[i+1]).

    ``weights[i]`` is the value of w on piece i; ``f_vec`` must accept an
    array of r values.  Each piece is integrated by composite Simpson with
    doubling refinement until the Richardson estimate of the total error
    falls under ``tol``.
    """
    breaks = np.asarray(breaks, dtype=float)
    weights = np.asarray(weights, dtype=float)
    keep = (np.diff(breaks) > 0) & (weights != 0.0)
    if not np.any(keep):
        return 0.0
    lo = breaks[:-1][keep]
    hi = breaks[1:][keep]
    w = weights[keep]

    def composite(k: int) -> np.ndarray:
        # k Simpson panels (2k+1 nodes) on every piece at once
        x = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, 2 * k + 1)
        y = f_vec(x.ravel()).reshape(x.shape)
        h = (hi - lo) / (2.0 * k)
        s = y[:, 0] + y[:, -1] + 4.0 * y[:, 1::2].sum(axis=1) + 2.0 * y[:, 2:-1:2].sum(axis=1)
        return h / 3.0 * s

    k = 4
    prev = composite(k)
    for _ in range(12):
        k *= 2
        cur = composite(k)
        err = np.abs(np.dot(w, cur - prev)) / 15.0
        if err <= tol:
            return float(np.dot(w, cur + (cur - prev) / 15.0))
        prev = cur
    return float(np.dot(w, prev))
