"""Norm-concentration estimation: deviation curves, profile fits, transfers.

A concentration profile (A, B, alpha, beta) asserts

    P{ | ||X||_2 / sqrt(n) - 1 | >= u }  <=  A exp(-B n^alpha u^beta),

and this module estimates deviation curves from samples, fits the four
parameters across dimensions, converts cone/surface profiles to volume
profiles, fits tail exponents of marginals, and evaluates the independent-sum
envelope exp(-eps^2 n / (16 C^2)) together with the spherical-cap bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import refdist
from .radial import OutsideRegimeError
from .reporting import ColumnTable
from .samplers import BodySpec, SampleBatch, iter_chunks


class InsufficientDataError(ValueError):
    """Raised when empirical curves have no usable dynamic range."""


@dataclass(frozen=True)
class ConcentrationProfile:
    A: float
    B: float
    alpha: float
    beta: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.A <= 0 or self.B <= 0:
            raise ValueError("A and B must be positive")

    def envelope(self, n: int, u) -> np.ndarray | float:
        u = np.asarray(u, dtype=float)
        out = self.A * np.exp(-self.B * float(n) ** self.alpha * u ** self.beta)
        return out if out.ndim else float(out)

    def to_json_obj(self) -> dict:
        return {"A": self.A, "B": self.B, "alpha": self.alpha, "beta": self.beta,
                "provenance": self.provenance}


@dataclass(frozen=True)
class TailFit:
    alpha_hat: float
    c_hat: float
    s_range: tuple[float, float]
    r_squared: float

    def __post_init__(self) -> None:
        if self.alpha_hat <= 0:
            raise ValueError("fitted exponent must be positive")
        if not (0.0 <= self.r_squared <= 1.0):
            raise ValueError("r^2 must lie in [0, 1]")


def empirical_deviation(batch: SampleBatch, u_grid) -> ColumnTable:
    """P{ | ||X||_2/sqrt(n) - 1 | >= u } with binomial standard errors.

    The batch's own normalization applies (scaled specs store divided points).
    """
    return deviation_curve_from_radii(
        np.linalg.norm(batch.points, axis=1) / math.sqrt(batch.n),
        u_grid, n=batch.n, metadata={"spec": batch.spec.label(), "N": batch.N,
                                     "seed": batch.seed})


def deviation_curve_from_radii(radii: np.ndarray, u_grid, n: int,
                               metadata: dict | None = None) -> ColumnTable:
    radii = np.asarray(radii, dtype=float)
    u = np.asarray(u_grid, dtype=float)
    if np.any(u < 0) or np.any(u > 1):
        raise ValueError("u grid must lie in [0, 1]")
    dev = np.abs(radii - 1.0)
    p_hat = np.array([(dev >= ui).mean() for ui in u])
    stderr = np.sqrt(p_hat * (1.0 - p_hat) / radii.size)
    meta = {"n": n, "N": radii.size}
    meta.update(metadata or {})
    return ColumnTable(columns={"n": np.full(u.shape, n), "u": u,
                                "p_hat": p_hat, "stderr": stderr}, metadata=meta)


def deviation_curve_streamed(spec: BodySpec, u_grid, N: int, seed: int,
                             chunk_size: int = 65536, threads: int = 0) -> ColumnTable:
    """Deviation curve without materializing the batch (large N*n runs)."""
    u = np.asarray(u_grid, dtype=float)
    counts = np.zeros(u.size, dtype=np.int64)
    total = 0
    for chunk in iter_chunks(spec, N, seed, chunk_size, threads):
        dev = np.abs(np.linalg.norm(chunk, axis=1) / math.sqrt(spec.n) - 1.0)
        counts += (dev[None, :] >= u[:, None]).sum(axis=1)
        total += chunk.shape[0]
    p_hat = counts / total
    stderr = np.sqrt(p_hat * (1.0 - p_hat) / total)
    return ColumnTable(columns={"n": np.full(u.shape, spec.n), "u": u,
                                "p_hat": p_hat, "stderr": stderr},
                       metadata={"spec": spec.label(), "n": spec.n, "N": N, "seed": seed})


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept and r^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise InsufficientDataError("degenerate abscissa in regression")
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    syy = np.sum((y - ym) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / syy if syy > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _affine_fit(x: np.ndarray, y: np.ndarray,
                w: np.ndarray) -> tuple[float, float, float]:
    """Weighted least squares of y on (1, x); returns (intercept, slope, sse)."""
    sw = np.sqrt(w)
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    resid = y - X @ coef
    return float(coef[0]), float(coef[1]), float(np.sum(w * resid ** 2))


def _beta_objective(groups: list, beta: float) -> float:
    # per-n affine fit of z = -log P on u^beta; the intercept absorbs -log A,
    # so this stage is insensitive to the amplitude
    total = 0.0
    for u, z, w in groups:
        _, slope, sse = _affine_fit(u ** beta, z, w)
        total += sse if slope > 0 else np.inf
    return total


def fit_profile(curves: Sequence[ColumnTable]) -> ConcentrationProfile:
    """Staged fit of (A, B, alpha, beta) to deviation curves across dimensions.

    Stage 1 fits beta at fixed n: z = -log P must be affine in u^beta, with
    the intercept absorbing -log A, so beta is found by a 1-d search that
    never interacts with the amplitude.  Stage 2 reads alpha off the per-n
    slopes B n^alpha against log n.  Stage 3 recovers (A, B) by linear
    regression of log P on n^alpha u^beta.  Staging keeps every step linear
    or 1-d where a joint four-parameter fit routinely diverges at desk-scale
    sample counts.
    """
    if len(curves) < 3:
        raise ValueError("need curves for at least 3 dimensions")
    rows = []
    for c in curves:
        has_err = "stderr" in c.columns
        for i, (nn, uu, pp) in enumerate(zip(c["n"], c["u"], c["p_hat"])):
            if 0.0 < pp < 1.0 and uu > 0:
                var_z = (c["stderr"][i] / pp) ** 2 if has_err else 0.0
                rows.append((float(nn), float(uu), float(pp), float(var_z)))
    if not rows:
        raise InsufficientDataError("insufficient dynamic range: all probabilities 0 or 1")
    data = np.array(rows)
    ns = np.unique(data[:, 0])
    if ns.size < 3:
        raise ValueError("need at least 3 distinct dimensions with usable points")

    # inverse-variance weights on z = -log P; exact curves get unit weights
    if np.all(data[:, 3] == 0.0):
        weights = np.ones(len(data))
    else:
        weights = 1.0 / np.maximum(data[:, 3], np.min(data[data[:, 3] > 0, 3]))

    groups, group_ns = [], []
    for nn in ns:
        m = data[:, 0] == nn
        if m.sum() >= 4:
            groups.append((data[m, 1], -np.log(data[m, 2]), weights[m]))
            group_ns.append(nn)
    if len(groups) < 3:
        raise InsufficientDataError("need >= 4 usable u-points at >= 3 dimensions")

    lo, hi = 0.05, 5.0
    for _ in range(6):
        grid = np.linspace(lo, hi, 60)
        scores = [_beta_objective(groups, b) for b in grid]
        i = int(np.argmin(scores))
        lo = grid[max(0, i - 1)]
        hi = grid[min(len(grid) - 1, i + 1)]
    beta = float(0.5 * (lo + hi))
    if not np.isfinite(_beta_objective(groups, beta)):
        raise InsufficientDataError("no positive-rate affine fit in the beta search")

    slopes = []
    for u, z, w in groups:
        _, slope, _ = _affine_fit(u ** beta, z, w)
        slopes.append(slope)
    alpha, log_b, _ = _ols(np.log(group_ns), np.log(slopes))

    x = data[:, 0] ** alpha * data[:, 1] ** beta
    log_a, neg_b, _ = _affine_fit(x, np.log(data[:, 2]), weights)
    b_fit = -neg_b
    if b_fit <= 0:
        raise InsufficientDataError("fitted rate is nonpositive")
    pred = log_a - b_fit * x
    resid = float(np.max(np.abs(pred - np.log(data[:, 2]))))
    return ConcentrationProfile(
        A=float(np.exp(log_a)), B=float(b_fit), alpha=float(alpha), beta=float(beta),
        provenance={"n_values": [float(v) for v in ns],
                    "u_range": [float(data[:, 1].min()), float(data[:, 1].max())],
                    "points": int(data.shape[0]),
                    "max_log_residual": resid})


def body_deviation_curves(spec_for_n, n_list: Sequence[int], N: int, seed: int,
                          levels=None, chunk_size: int = 65536,
                          threads: int = 0) -> list[ColumnTable]:
    """Per-dimension deviation curves on quantile-derived u grids.

    ``spec_for_n`` maps a dimension to a BodySpec.  The u grid at each n is
    placed at empirical quantiles of | ||X||/sqrt(n) - 1 | so every cell has
    usable dynamic range regardless of how fast the deviations shrink with n;
    ``levels`` are the targeted exceedance probabilities.
    """
    if levels is None:
        levels = np.geomspace(0.2, 1e-3, 10)
    levels = np.asarray(levels, dtype=float)
    curves = []
    for i, n in enumerate(n_list):
        spec = spec_for_n(n)
        dev_parts = []
        for chunk in iter_chunks(spec, N, seed + i, chunk_size, threads):
            dev_parts.append(np.abs(np.linalg.norm(chunk, axis=1) / math.sqrt(n) - 1.0))
        dev = np.concatenate(dev_parts)
        u = np.quantile(dev, 1.0 - levels)
        if np.any(np.diff(u) <= 0) or u[0] <= 0:
            raise InsufficientDataError(
                f"deviation quantiles degenerate at n={n} (body {spec.label()})")
        p_hat = np.array([(dev >= ui).mean() for ui in u])
        stderr = np.sqrt(p_hat * (1 - p_hat) / dev.size)
        curves.append(ColumnTable(
            columns={"n": np.full(u.shape, n), "u": u, "p_hat": p_hat, "stderr": stderr},
            metadata={"spec": spec.label(), "n": n, "N": N, "seed": seed + i,
                      "levels": [float(x) for x in levels]}))
    return curves


def transfer_profile(profile: ConcentrationProfile, source: str = "cone") -> ConcentrationProfile:
    """Cone/surface profile -> volume-measure profile.

    Exponents become (min(alpha, 1), max(beta, 1)).  The amplitude A' = A + 1
    and rate B' = min(B 2^{-beta}, 1/2) follow from the union bound that adds
    the radial factor exp(-n u / 2) and halves the deviation; they are an
    implementation choice consistent with that argument, not quoted values.
    """
    if source not in ("cone", "surface"):
        raise ValueError("source must be 'cone' or 'surface'")
    return ConcentrationProfile(
        A=profile.A + 1.0,
        B=min(profile.B * 2.0 ** (-profile.beta), 0.5),
        alpha=min(profile.alpha, 1.0),
        beta=max(profile.beta, 1.0),
        provenance={"transferred_from": source, "parent": profile.to_json_obj()})


def psi_alpha_fit(samples: np.ndarray, s_range: tuple[float, float],
                  grid_points: int = 25, min_exceed: int = 100) -> TailFit:
    """Fit P{X > s} ~ C exp(-c s^alpha) by regressing log(-log tail) on log s."""
    x = np.asarray(samples, dtype=float)
    if x.size < 10_000:
        raise ValueError("need at least 1e4 samples for a tail fit")
    s_lo, s_hi = s_range
    if not (0 < s_lo < s_hi):
        raise ValueError("s_range must be positive and increasing")
    if np.sum(x > s_lo) < min_exceed:
        raise InsufficientDataError(
            f"insufficient tail mass: fewer than {min_exceed} samples exceed {s_lo}")
    s = np.linspace(s_lo, s_hi, grid_points)
    tail = np.array([(x > si).mean() for si in s])
    usable = (tail > 0) & (tail < 1)
    if usable.sum() < 4:
        raise InsufficientDataError("insufficient dynamic range in the tail window")
    y = np.log(-np.log(tail[usable]))
    slope, intercept, r2 = _ols(np.log(s[usable]), y)
    return TailFit(alpha_hat=slope, c_hat=float(np.exp(intercept)),
                   s_range=(float(s_lo), float(s_hi)), r_squared=max(0.0, min(1.0, r2)))


def bernstein_envelope(c_moment: float, eps: float, n: int,
                       regime_c: float = 1.0) -> float:
    """Sum-deviation envelope exp(-eps^2 n / (16 C^2)) for 0 <= eps <= c sqrt(n)."""
    if c_moment <= 0:
        raise ValueError("moment constant must be positive")
    if eps < 0 or eps > regime_c * math.sqrt(n):
        raise OutsideRegimeError(f"need 0 <= eps <= {regime_c:g} sqrt(n)")
    return float(math.exp(-eps * eps * n / (16.0 * c_moment * c_moment)))


def cap_extension_height(gamma) -> np.ndarray | float:
    """First-coordinate height of the Euclidean gamma-extension of a half-sphere.

    A point with first coordinate h > 0 has Euclidean distance
    sqrt(2 - 2 sqrt(1 - h^2)) to the half-sphere {x_1 <= 0} (nearest point is
    the chord foot on the equator), so the extension is {x_1 <= h(gamma)}
    with h = gamma sqrt(1 - gamma^2 / 4), valid for gamma <= sqrt(2).
    """
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(g > math.sqrt(2.0)):
        raise ValueError("gamma must lie in [0, sqrt(2)]")
    out = g * np.sqrt(1.0 - g * g / 4.0)
    return out if out.ndim else float(out)


def sphere_cap_check(n: int, gamma_grid, mc_samples: int = 0,
                     seed: int = 0) -> ColumnTable:
    """Check sigma(A)(1 - sigma(A_gamma)) <= exp(-(n-1) gamma^2 / 4), A a half-sphere.

    sigma(A_gamma) is exact through the first-coordinate marginal CDF.  With
    ``mc_samples`` > 0 a Monte Carlo recount of 1 - sigma(A_gamma) (same
    geometry, independent arithmetic) is added for cross-validation.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    g = np.asarray(gamma_grid, dtype=float)
    if np.any(g < 0) or np.any(g > 1):
        raise ValueError("gamma grid must lie in (0, 1]")
    h = cap_extension_height(g)
    # first coordinate of a uniform sphere point, times sqrt(n), follows the
    # spherical marginal law
    miss = refdist.sph_tail(n, math.sqrt(n) * h)
    lhs = 0.5 * np.asarray(miss)
    rhs = np.exp(-(n - 1) * g * g / 4.0)
    cols = {"gamma": g, "extension_height": h, "lhs": lhs, "rhs": rhs,
            "holds": lhs <= rhs}
    meta: dict = {"n": n, "set": "half-sphere x1<=0", "sigma_A": 0.5}
    if mc_samples:
        from .samplers import sample_sphere
        x1 = sample_sphere(n, mc_samples, seed).points[:, 0]
        mc_miss = np.array([(x1 > hi).mean() for hi in h])
        cols["mc_miss"] = mc_miss
        cols["mc_stderr"] = np.sqrt(np.maximum(miss * (1 - miss), 1e-300) / mc_samples)
        meta["mc_samples"] = mc_samples
        meta["mc_seed"] = seed
    return ColumnTable(columns=cols, metadata=meta)


def cone_norm_scaling_exponent(p: float, n_list: Sequence[int], N: int,
                               seed: int) -> tuple[float, ColumnTable]:
    """Slope of log E||X||_2 vs log n under the l_p cone measure.

    The mean Euclidean norm scales like n^{1/2 - 1/p} (up to constants); the
    slope is the checkable part, the prefactor is only reported.
    """
    from .samplers import sample_cone_lp
    means = []
    for i, n in enumerate(n_list):
        batch = sample_cone_lp(p, n, N, seed + i)
        means.append(float(np.linalg.norm(batch.points, axis=1).mean()))
    slope, intercept, r2 = _ols(np.log(np.asarray(n_list, float)), np.log(means))
    table = ColumnTable(columns={"n": np.asarray(n_list, float), "mean_norm": np.asarray(means)},
                        metadata={"p": p, "slope": slope, "prefactor": float(np.exp(intercept)),
                                  "expected_slope": 0.5 - 1.0 / p, "r_squared": r2,
                                  "N": N, "seed": seed})
    return slope, table
