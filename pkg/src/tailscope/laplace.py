"""The peaked integral I(K; L) = int_0^1 exp(K u - L u^beta) du.

This integral controls the mid-range radial error term: K plays the role of
a squared threshold (~t^2) and L of a concentration rate (~n^alpha).  The
module evaluates it by adaptive quadrature, locates the interior maximum of
the exponent for beta > 1, and checks the regime bound K*I <= C(beta) *
K^{max(beta,1)} / L.  Only the beta <= 1 constant is explicit,
2^{1/beta} Gamma(1/beta + 1); for beta > 1 the scan records the grid sup.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .radial import OutsideRegimeError


@dataclass(frozen=True)
class LaplaceParams:
    K: float
    L: float
    beta: float

    def __post_init__(self) -> None:
        if self.K < 0:
            raise ValueError(f"K must be nonnegative, got {self.K}")
        if self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class BoundCheck:
    lhs: float          # K * I(K; L)
    rhs_scale: float    # K^{max(beta,1)} / L
    ratio: float


def exponent(params: LaplaceParams, u) -> np.ndarray | float:
    u = np.asarray(u, dtype=float)
    return params.K * u - params.L * u ** params.beta


def integral_I(params: LaplaceParams, tol: float = 1e-10) -> float:
    """Adaptive quadrature of exp(K u - L u^beta) over [0, 1].

    For beta = 1 this matches the closed form (e^{K-L} - 1)/(K - L)
    (with value 1 in the K = L limit); the quadrature is split at the
    interior maximum when beta > 1 so the peak is resolved.
    """
    pts = None
    if params.beta > 1 and params.K > 0:
        u0, _ = maximizer(params)
        if 0.0 < u0 < 1.0:
            pts = [u0]
    val, _ = quad(lambda u: np.exp(exponent(params, u)), 0.0, 1.0,
                  points=pts, epsabs=tol, epsrel=tol, limit=200)
    return float(val)


def closed_form_beta1(K: float, L: float) -> float:
    """I(K; L) for beta = 1: (e^{K-L} - 1)/(K - L), continuously 1 at K = L."""
    d = K - L
    if d == 0.0:
        return 1.0
    return float(np.expm1(d) / d)


def maximizer(params: LaplaceParams) -> tuple[float, float]:
    """Interior maximum of E(u) = K u - L u^beta for beta > 1, K > 0.

    Returns (u0, E(u0)) with u0 = (K / (beta L))^{1/(beta-1)} and
    E(u0) = C_beta (K^beta / L)^{1/(beta-1)},
    C_beta = beta^{-1/(beta-1)} - beta^{-beta/(beta-1)}.
    u0 >= 1 means the maximum sits at or beyond the right endpoint.
    """
    if params.beta <= 1:
        raise ValueError("maximizer requires beta > 1")
    if params.K <= 0:
        raise ValueError("maximizer requires K > 0")
    b = params.beta
    u0 = (params.K / (b * params.L)) ** (1.0 / (b - 1.0))
    c_beta = b ** (-1.0 / (b - 1.0)) - b ** (-b / (b - 1.0))
    e0 = c_beta * (params.K ** b / params.L) ** (1.0 / (b - 1.0))
    return float(u0), float(e0)


def case2_constant(beta: float) -> float:
    """Explicit envelope constant 2^{1/beta} Gamma(1/beta + 1) for beta <= 1."""
    if beta <= 0 or beta > 1:
        raise ValueError("explicit constant applies to 0 < beta <= 1")
    return float(2.0 ** (1.0 / beta) * gamma_fn(1.0 / beta + 1.0))


def bound_check(params: LaplaceParams) -> BoundCheck:
    """lhs = K*I, rhs_scale = K^{max(beta,1)}/L and their ratio, in-regime only."""
    if params.K <= 0:
        raise ValueError("bound_check requires K > 0")
    rhs_scale = params.K ** max(params.beta, 1.0) / params.L
    if rhs_scale >= 0.5:
        raise OutsideRegimeError(
            f"outside proposition regime: K^max(beta,1)/L = {rhs_scale:g} >= 1/2")
    lhs = params.K * integral_I(params)
    return BoundCheck(lhs=lhs, rhs_scale=rhs_scale, ratio=lhs / rhs_scale)


def case1_ratio_scan(beta: float, k_grid, l_grid) -> tuple[float, list[tuple[float, float, float]]]:
    """Grid sup of the bound ratio for beta > 1 (finite, but grows ~L^{1-1/beta}).

    Returns (sup, rows) where rows are the in-regime (K, L, ratio) cells.
    """
    if beta <= 1:
        raise ValueError("scan applies to beta > 1")
    rows = []
    sup = 0.0
    for K in k_grid:
        for L in l_grid:
            if K ** beta / L < 0.5 and K > 0:
                chk = bound_check(LaplaceParams(K=K, L=L, beta=beta))
                rows.append((K, L, chk.ratio))
                sup = max(sup, chk.ratio)
    return sup, rows
