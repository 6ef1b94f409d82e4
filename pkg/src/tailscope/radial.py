"""Radial laws and the transform to the average marginal.

For a measure on R^n, only the law of r = |X|/sqrt(n) (its normalized radial
projection) enters the average marginal: the tail and density of the average
marginal are mixtures of rescaled spherical-marginal tails and densities,

    1 - F_av(t) = E[ 1 - Psi_n(t/r) ],      f_av(t) = E[ psi_n(t/r) / r ].

A radial law is stored as a finite set of atoms (a point mass, an explicit
weighted list or an empirical sample), so the mixture is an exact weighted
sum, not a quadrature.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import fixtures, refdist
from .quadrature import piecewise_step_integral

_WEIGHT_TOL = 1e-12


class OutsideRegimeError(ValueError):
    """A bound was requested outside its guaranteed parameter regime."""


@dataclass(frozen=True)
class RadialDistribution:
    """Atoms of the law of |X|/sqrt(n); radii sorted ascending, weights sum to 1."""

    n: int
    radii: np.ndarray
    weights: np.ndarray
    kind: str = "atoms"

    def __post_init__(self) -> None:
        r = np.asarray(self.radii, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if r.ndim != 1 or r.shape != w.shape or r.size == 0:
            raise ValueError("radii and weights must be matching nonempty 1-d arrays")
        if np.any(r <= 0):
            raise ValueError("all radii must be positive (no atom at the origin)")
        if np.any(w < 0) or abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        order = np.argsort(r, kind="stable")
        cum = np.cumsum(w[order])
        cum[-1] = 1.0  # weights sum to 1 within tolerance; pin the endpoint
        object.__setattr__(self, "radii", r[order])
        object.__setattr__(self, "weights", w[order])
        object.__setattr__(self, "_cum", cum)
        self.radii.setflags(write=False)
        self.weights.setflags(write=False)
        self._cum.setflags(write=False)

    @classmethod
    def atom(cls, n: int, r0: float) -> "RadialDistribution":
        return cls(n, np.array([float(r0)]), np.array([1.0]), kind="atom")

    @classmethod
    def atoms(cls, n: int, pairs: Sequence[tuple[float, float]]) -> "RadialDistribution":
        r, w = zip(*pairs)
        return cls(n, np.asarray(r, dtype=float), np.asarray(w, dtype=float), kind="atoms")

    @classmethod
    def empirical(cls, n: int, sample: np.ndarray) -> "RadialDistribution":
        sample = np.asarray(sample, dtype=float)
        w = np.full(sample.shape, 1.0 / sample.size)
        return cls(n, sample, w, kind="empirical")

    @classmethod
    def from_csv(cls, n: int, path) -> "RadialDistribution":
        """Load an empirical radial law from a one-column CSV (header r_over_sqrt_n)."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["r_over_sqrt_n"]:
                raise ValueError(f"expected header ['r_over_sqrt_n'], got {header}")
            values = np.array([float(row[0]) for row in reader])
        return cls.empirical(n, values)

    def to_csv(self, path) -> None:
        if self.kind != "empirical":
            raise ValueError("only empirical radial laws round-trip through CSV")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["r_over_sqrt_n"])
            for r in self.radii:
                writer.writerow(["%.17g" % r])

    def cdf(self, r) -> np.ndarray | float:
        """mu*(r) = P{|X| <= sqrt(n) r} (right-continuous step function)."""
        idx = np.searchsorted(self.radii, np.asarray(r, dtype=float), side="right")
        out = self._cum[np.clip(idx - 1, 0, None)]
        out = np.where(idx == 0, 0.0, out)
        return out if np.ndim(r) else float(out)


@dataclass(frozen=True)
class ErrorTerms:
    """Decomposition of the averaged-tail relative error at one t."""

    term1: float
    term2: float
    term3: float

    def __post_init__(self) -> None:
        for name in ("term1", "term2", "term3"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    def bound(self, t: float, c: float = fixtures.AVG_TAIL_ERROR_C) -> float:
        return self.term1 + c * t * t * (self.term2 + self.term3)


def avg_tail(radial: RadialDistribution, t: float) -> float:
    """Tail of the average marginal: sum of w_i * (1 - Psi_n(t / r_i))."""
    return float(np.dot(radial.weights, refdist.sph_tail(radial.n, t / radial.radii)))


def avg_density(radial: RadialDistribution, t: float) -> float:
    """Density of the average marginal: sum of w_i * psi_n(t / r_i) / r_i."""
    vals = refdist.sph_density(radial.n, t / radial.radii) / radial.radii
    return float(np.dot(radial.weights, vals))


def avg_log_tail(radial: RadialDistribution, t: float) -> float:
    """Log of avg_tail, assembled with the deep-tail log path per atom."""
    logs = refdist.sph_log_tail(radial.n, t / radial.radii)
    m = np.max(logs)
    if not np.isfinite(m):
        return -np.inf
    return float(m + np.log(np.dot(radial.weights, np.exp(logs - m))))


def error_terms(radial: RadialDistribution, t: float,
                tol: float = 1e-10) -> ErrorTerms:
    """The three nonnegative pieces controlling |avg tail / spherical tail - 1|.

    term1 covers radial mass beyond 2; term2 integrates the density ratio
    against mu* on (0, 1); term3 against 1 - mu* on (1, 2).  The integrands
    are assembled in log space, and the exact support cutoff (psi_n(t/r) = 0
    for r < t/sqrt(n)) truncates the inner integral.
    """
    n = radial.n
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if 8.0 * t * t >= n:
        raise OutsideRegimeError(f"need 8 t^2 < n, got t={t}, n={n}")
    log_psi_t = refdist.sph_log_density(n, t)

    def ratio_integrand(r: np.ndarray) -> np.ndarray:
        return np.exp(refdist.sph_log_density(n, t / r) - log_psi_t - 2.0 * np.log(r))

    mass_tail = 1.0 - radial.cdf(2.0)
    term1 = mass_tail * fixtures.TAIL_HAZARD_ENVELOPE * t / np.exp(log_psi_t)

    cum = np.cumsum(radial.weights)
    lo_cut = max(t / np.sqrt(n), 0.0)

    # mu* on (0, 1): steps at atoms strictly inside the interval
    inner = radial.radii[(radial.radii > lo_cut) & (radial.radii < 1.0)]
    breaks = np.concatenate(([lo_cut], inner, [1.0]))
    weights = radial.cdf(breaks[:-1])
    term2 = piecewise_step_integral(ratio_integrand, breaks, weights, tol=tol) if lo_cut < 1.0 else 0.0

    # 1 - mu* on (1, 2)
    mid = radial.radii[(radial.radii > 1.0) & (radial.radii < 2.0)]
    breaks3 = np.concatenate(([1.0], mid, [2.0]))
    weights3 = 1.0 - radial.cdf(breaks3[:-1])
    term3 = piecewise_step_integral(ratio_integrand, breaks3, weights3, tol=tol)

    return ErrorTerms(term1=float(term1), term2=float(max(term2, 0.0)),
                      term3=float(max(term3, 0.0)))


def theorem_bound(profile, n: int, t: float,
                  c_mult: float = fixtures.THEOREM_BOUND_C,
                  regime_c: float = fixtures.THEOREM_REGIME_C) -> float:
    """Predicted deviation envelope c_mult * t^{2 max(beta,1)} * n^{-alpha}.

    ``profile`` is any object with ``alpha`` and ``beta`` attributes.  Raises
    OutsideRegimeError when t^{2 max(beta,1)} * n^{-alpha} >= regime_c.
    """
    expo = 2.0 * max(profile.beta, 1.0)
    scale = t ** expo * float(n) ** (-profile.alpha)
    if scale >= regime_c:
        raise OutsideRegimeError(
            f"outside theorem regime: t^{expo:g} * n^-{profile.alpha:g} = {scale:g} >= {regime_c:g}")
    return c_mult * scale


def mixture(parts: Sequence[tuple[float, RadialDistribution]]) -> RadialDistribution:
    """Convex combination of radial laws over a common dimension."""
    ns = {rad.n for _, rad in parts}
    if len(ns) != 1:
        raise ValueError("mixture components must share the ambient dimension")
    lam = np.array([p for p, _ in parts], dtype=float)
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > _WEIGHT_TOL:
        raise ValueError("mixture coefficients must be nonnegative and sum to 1")
    radii = np.concatenate([rad.radii for _, rad in parts])
    weights = np.concatenate([lam[i] * rad.weights for i, (_, rad) in enumerate(parts)])
    return RadialDistribution(ns.pop(), radii, weights, kind="atoms")
