"""Reference laws: the dimension-n spherical marginal and the standard normal.

The spherical marginal is the first-coordinate law of the uniform measure on
the radius-sqrt(n) sphere.  Its density is

    psi_n(t) = Gamma(n/2) / (sqrt(pi*n) * Gamma((n-1)/2)) * (1 - t^2/n)^((n-3)/2)

on [-sqrt(n), sqrt(n)] and zero outside.  Everything here is evaluated in log
space (log-gamma differences, log1p) so that dimensions up to 1e7 neither
overflow nor underflow.

CDF method
----------
``sph_cdf``/``sph_tail`` use the regularized incomplete beta identity: with
a = (n-1)/2 and x = (1 + t/sqrt(n))/2, the CDF equals I_x(a, a).  The tail is
evaluated at the mirrored argument to avoid cancellation.  When the tail is
too deep for the beta routine (under ~1e-275 it underflows), ``sph_log_tail``
switches to scaled adaptive quadrature of the density in log space; the
selected path is recorded in ``CDF_METHOD`` / ``DEEP_TAIL_METHOD``.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.special import betainc, gammaln, log_ndtr, ndtr

from .reporting import TailRatioReport

CDF_METHOD = "regularized_incomplete_beta"
DEEP_TAIL_METHOD = "log_space_adaptive_quadrature"

# betainc underflows around 1e-308; switch to quadrature with margin
_BETA_TAIL_FLOOR = 1e-275

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _check_dim(n: int) -> int:
    if not float(n).is_integer() or n < 3:
        raise ValueError(f"dimension must be an integer >= 3, got {n!r}")
    return int(n)


def _log_norm_const(n: int) -> float:
    # log of Gamma(n/2) / (sqrt(pi n) Gamma((n-1)/2)).  For large n the
    # gammaln difference cancels ~log(n) digits, so switch to the series
    # Gamma(z + 1/2)/Gamma(z) = sqrt(z) (1 - 1/(8z) + 1/(128 z^2) + 5/(1024 z^3) ...)
    # with z = (n-1)/2 (next term is O(z^-4), far below 1e-12 here).
    if n <= 20000:
        log_ratio = float(gammaln(n / 2.0) - gammaln((n - 1) / 2.0))
    else:
        z = 0.5 * (n - 1.0)
        log_ratio = 0.5 * np.log(z) + np.log1p(
            -1.0 / (8.0 * z) + 1.0 / (128.0 * z * z) + 5.0 / (1024.0 * z ** 3))
    return log_ratio - 0.5 * float(np.log(np.pi * n))


def sph_log_density(n: int, t) -> np.ndarray | float:
    """Natural log of the spherical marginal density.

    Returns -inf outside the support.  For n = 3 the density is the constant
    1/(2*sqrt(3)) on the closed interval [-sqrt(3), sqrt(3)] (the exponent
    (n-3)/2 vanishes, so the boundary needs no 0**0 special case downstream).
    """
    n = _check_dim(n)
    t_arr = np.asarray(t, dtype=float)
    c = _log_norm_const(n)
    if n == 3:
        out = np.where(np.abs(t_arr) <= np.sqrt(3.0), c, -np.inf)
    else:
        x2 = t_arr * t_arr / n
        inside = x2 < 1.0
        out = np.full(t_arr.shape, -np.inf)
        out[inside] = c + 0.5 * (n - 3) * np.log1p(-x2[inside])
    return out if np.ndim(t) else float(out)


def sph_density(n: int, t) -> np.ndarray | float:
    """Spherical marginal density; exactly 0 outside [-sqrt(n), sqrt(n)]."""
    out = np.exp(sph_log_density(n, t))
    return out if np.ndim(t) else float(out)


def sph_cdf(n: int, t) -> np.ndarray | float:
    """CDF of the spherical marginal via the incomplete beta identity."""
    n = _check_dim(n)
    t_arr = np.asarray(t, dtype=float)
    a = 0.5 * (n - 1)
    x = np.clip(0.5 * (1.0 + t_arr / np.sqrt(n)), 0.0, 1.0)
    out = betainc(a, a, x)
    return out if np.ndim(t) else float(out)


def sph_tail(n: int, t) -> np.ndarray | float:
    """1 - CDF, evaluated without cancellation (beta at the mirrored point)."""
    n = _check_dim(n)
    t_arr = np.asarray(t, dtype=float)
    a = 0.5 * (n - 1)
    x = np.clip(0.5 * (1.0 - t_arr / np.sqrt(n)), 0.0, 1.0)
    out = betainc(a, a, x)
    return out if np.ndim(t) else float(out)


def _log_tail_quad(n: int, t: float) -> float:
    # log integral of the density over [t, sqrt(n)], scaled by the density at t
    rn = np.sqrt(n)
    if t >= rn:
        return -np.inf
    log_at_t = sph_log_density(n, t)
    rate = max((n - 3) * t / (n - t * t), 1e-3)
    hi = min(rn, t + 60.0 / rate)
    val, _ = quad(lambda s: np.exp(sph_log_density(n, s) - log_at_t), t, hi, limit=200)
    return float(log_at_t + np.log(val))


def sph_log_tail(n: int, t) -> np.ndarray | float:
    """log(1 - CDF), usable far past double-precision tail underflow.

    Uses the beta identity while it resolves, then the scaled-quadrature
    deep-tail path (accurate down to log-tails of order -1e4 and below).
    """
    n = _check_dim(n)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape)
    tail = np.atleast_1d(sph_tail(n, t_arr))
    with np.errstate(divide="ignore"):
        out[:] = np.log(tail)
    deep = (tail < _BETA_TAIL_FLOOR) & (np.abs(t_arr) < np.sqrt(n))
    for i in np.nonzero(deep)[0]:
        out[i] = _log_tail_quad(n, float(t_arr[i]))
    return out if np.ndim(t) else float(out[0])


def gauss_density(t) -> np.ndarray | float:
    t_arr = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * t_arr * t_arr - _LOG_SQRT_2PI)
    return out if np.ndim(t) else float(out)


def gauss_cdf(t) -> np.ndarray | float:
    out = ndtr(np.asarray(t, dtype=float))
    return out if np.ndim(t) else float(out)


def gauss_tail(t) -> np.ndarray | float:
    out = ndtr(-np.asarray(t, dtype=float))
    return out if np.ndim(t) else float(out)


def gauss_log_tail(t) -> np.ndarray | float:
    """log(1 - Phi(t)) via the log-space complementary error function."""
    out = log_ndtr(-np.asarray(t, dtype=float))
    return out if np.ndim(t) else float(out)


def gauss_shift_bound(t: float, s: float) -> tuple[float, float]:
    """The pair (1 - Phi(t-s), (1 - Phi(t)) * exp(s*t)) for shift sweeps.

    The two sides agree at s = 0.  The left side can exceed the right by a
    bounded factor (sup ratio -> 2 as t -> 0 with s*t -> 0), so consumers
    compare against the recorded envelope rather than asserting lhs <= rhs.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if s < 0:
        raise ValueError(f"s must be nonnegative, got {s}")
    lhs = float(ndtr(-(t - s)))
    rhs = float(np.exp(log_ndtr(-t) + s * t))
    return lhs, rhs


def sph_log_slope(n: int, t) -> np.ndarray | float:
    """d/dt log psi_n(t) = -(n-3) t / (n - t^2), for |t| < sqrt(n).

    Identically zero for n = 3 (constant density).
    """
    n = _check_dim(n)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr * t_arr >= n):
        raise ValueError("log-slope undefined at or outside the support boundary")
    out = -(n - 3) * t_arr / (n - t_arr * t_arr)
    return out if np.ndim(t) else float(out)


def sph_density_to_slope_ratio(n: int, t) -> np.ndarray | float:
    """psi_n(t) / (t^{-1} psi_n'(t)) = -(n - t^2)/(n - 3), from differentiation.

    Direct differentiation gives psi_n'(t) = -psi_n(t) (n-3) t / (n - t^2);
    the ratio is therefore negative and independent of how close t is to the
    support boundary, differing in sign and in an n/(n-3) factor from the
    naive (1 - t^2/n) guess.
    """
    n = _check_dim(n)
    if n == 3:
        raise ValueError("density is constant for n = 3; slope ratio undefined")
    t_arr = np.asarray(t, dtype=float)
    out = -(n - t_arr * t_arr) / (n - 3.0)
    return out if np.ndim(t) else float(out)


def sph_shift_ratio(n: int, t: float, u: float) -> float:
    """log(psi_n(t) / psi_n((1+u)t)) / (u t^2), the normalized shift log-ratio.

    Requires 2 (1+u)^2 t^2 < n, u in [0, 1], t > 0; within that region the
    value stays inside a fixed positive band (see fixtures).
    """
    n = _check_dim(n)
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"u must be in [0, 1], got {u}")
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if 2.0 * (1.0 + u) ** 2 * t * t >= n:
        raise ValueError("outside the shift-ratio region: need 2 (1+u)^2 t^2 < n")
    if u == 0.0:
        # limit u -> 0: derivative of -log psi at t, over t^2
        return float((n - 3) / (n - t * t))
    num = 0.5 * (n - 3) * (np.log1p(-t * t / n) - np.log1p(-((1 + u) * t) ** 2 / n))
    return float(num / (u * t * t))


def fourth_order_diagnostic(n: int, t) -> tuple[np.ndarray, np.ndarray]:
    """D(n, t) = log(psi_n(t)/phi(t)) + t^4/(4n) and its envelope.

    The envelope 2 (t^2/n + t^6/n^2) absorbs the lower-order terms of the
    log expansion for t above ~0.5; valid anywhere inside the support.
    """
    n = _check_dim(n)
    t = np.asarray(t, dtype=float)
    diag = (sph_log_density(n, t) + 0.5 * t * t + _LOG_SQRT_2PI) + t ** 4 / (4.0 * n)
    return diag, 2.0 * (t ** 2 / n + t ** 6 / n ** 2)


def sph_gauss_report(n: int, t_grid) -> TailRatioReport:
    """Density/tail ratios against the normal law plus the t^4/(4n) diagnostic.

    The diagnostic column is D(n, t) = log(psi_n(t)/phi(t)) + t^4/(4n), whose
    smallness expresses that the spherical and Gaussian laws agree to fourth
    order; the companion column gives the envelope 2 (t^2/n + t^6/n^2).
    """
    n = _check_dim(n)
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(t > 0.25 * np.sqrt(n)):
        raise ValueError("t grid must lie in (0, 0.25*sqrt(n)]")
    log_density_ratio = sph_log_density(n, t) + 0.5 * t * t + _LOG_SQRT_2PI
    log_tail_ratio = sph_log_tail(n, t) - gauss_log_tail(t)
    diag, envelope = fourth_order_diagnostic(n, t)
    return TailRatioReport(
        columns={
            "t": t,
            "density_ratio": np.exp(log_density_ratio),
            "tail_ratio": np.exp(log_tail_ratio),
            "fourth_order_diag": diag,
            "fourth_order_envelope": envelope,
        },
        metadata={"n": n, "kind": "sph_gauss_comparison", "cdf_method": CDF_METHOD},
    )
