"""One-sample Kolmogorov-Smirnov distance against a reference CDF."""
from __future__ import annotations

import math

import numpy as np


def ks_statistic(sample: np.ndarray, cdf_values_at_sorted: np.ndarray | None = None,
                 cdf=None) -> float:
    """sup |F_hat - F| for a sample against a reference CDF.

    Pass either the CDF evaluated at the sorted sample or a callable.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    if cdf_values_at_sorted is None:
        if cdf is None:
            raise ValueError("provide cdf values or a cdf callable")
        cdf_values_at_sorted = cdf(x)
    f = np.asarray(cdf_values_at_sorted, dtype=float)
    n = x.size
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - f)
    d_minus = np.max(f - (grid - 1.0 / n))
    return float(max(d_plus, d_minus))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample critical value sqrt(-log(alpha/2) / 2) / sqrt(n)."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)
