"""Experiment-driver tests: estimator identities, cross-validation, sweeps."""
import math

import numpy as np
import pytest
from scipy.stats import binom

from tailscope import refdist
from tailscope.concentration import ConcentrationProfile, InsufficientDataError
from tailscope.experiments import (
    corollary_T_budget,
    direction_sweep,
    directional_tail,
    estimate_avg_density,
    estimate_avg_tail,
    local_direction_sweep,
    uniform_directions,
)
from tailscope.samplers import BodySpec, rademacher_law


def scaled_sphere(n):
    return BodySpec(kind="sphere", n=n).scaled_isotropic()


def scaled_cube(n):
    return BodySpec(kind="lp_volume", n=n, p=math.inf).scaled_isotropic()


class TestAvgTail:
    def test_sphere_ratio_is_exactly_one(self):
        rep = estimate_avg_tail(scaled_sphere(64), [0.5, 1.0, 2.0], 2000, seed=3)
        np.testing.assert_allclose(rep["ratio_sph"], 1.0, atol=1e-12)
        assert np.all(rep["stderr"] < 1e-9)

    def test_methods_agree_within_3_se(self):
        spec = scaled_cube(64)
        t = np.array([0.5, 1.0, 2.0])
        a = estimate_avg_tail(spec, t, 40_000, seed=11, method="bv_from_radial")
        b = estimate_avg_tail(spec, t, 40_000, seed=12, method="direct_mc")
        se = np.sqrt(a["stderr"] ** 2 + b["stderr"] ** 2)
        assert np.all(np.abs(a["estimate"] - b["estimate"]) <= 3 * se)

    def test_direct_mc_deep_tail_signal(self):
        with pytest.raises(InsufficientDataError):
            estimate_avg_tail(scaled_cube(64), [6.0], 2000, seed=13, method="direct_mc")

    def test_radial_method_has_no_depth_limit(self):
        rep = estimate_avg_tail(scaled_cube(64), [6.0], 2000, seed=13)
        assert rep["estimate"][0] >= 0.0

    def test_bound_column_from_profile(self):
        prof = ConcentrationProfile(A=2, B=1, alpha=1.0, beta=2.0)
        rep = estimate_avg_tail(scaled_sphere(256), [1.0, 2.0], 1000, seed=17, profile=prof)
        assert rep["bound"][0] == pytest.approx(1.0 / 256)
        assert rep["bound"][1] == pytest.approx(16.0 / 256)

    def test_provenance_metadata(self):
        rep = estimate_avg_tail(scaled_sphere(16), [1.0], 100, seed=19)
        for key in ("spec", "n", "N", "seed", "method", "scale"):
            assert key in rep.metadata


class TestAvgDensity:
    def test_sphere_density_exact(self):
        t = np.array([0.0, 0.7, 2.0])
        rep = estimate_avg_density(scaled_sphere(64), t, 500, seed=23)
        np.testing.assert_allclose(rep["estimate"], refdist.sph_density(64, t), atol=1e-12)

    def test_density_integrates_to_one(self):
        spec = scaled_cube(64)
        t = np.linspace(-9, 9, 601)
        rep = estimate_avg_density(spec, t, 20_000, seed=29)
        integral = np.trapezoid(rep["estimate"], t)
        assert integral == pytest.approx(1.0, abs=1e-3)

    def test_matches_tail_derivative(self):
        spec = scaled_cube(32)
        h = 1e-4
        for t in [0.5, 1.5]:
            tails = estimate_avg_tail(spec, [t - h, t + h], 10_000, seed=31)
            dens = estimate_avg_density(spec, [t], 10_000, seed=31)
            fd = -(tails["estimate"][1] - tails["estimate"][0]) / (2 * h)
            assert fd == pytest.approx(dens["estimate"][0], rel=1e-5)


class TestDirectionalTail:
    def test_rademacher_matches_exact_binomial(self):
        # the projection is lattice-valued with spacing 2/sqrt(20); testing at
        # atom midpoints keeps the >= comparison float-robust
        n, N = 20, 50_000
        spec = BodySpec(kind="product", n=n, law=rademacher_law())
        t_grid = (2 * np.arange(0, 7) + 1) / math.sqrt(n)
        rep = directional_tail(spec, np.ones(n), t_grid, N, seed=37)
        for t, emp in zip(rep["t"], rep["estimate"]):
            k = math.ceil((t * math.sqrt(n) + n) / 2)
            exact = float(binom.sf(k - 1, n, 0.5))
            lo, hi = _clopper_pearson(round(emp * N), N, 1e-3)
            assert lo <= exact <= hi


def _clopper_pearson(k, n, alpha):
    from scipy.stats import beta as beta_dist
    lo = 0.0 if k == 0 else float(beta_dist.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.isf(alpha / 2, k + 1, n - k))
    return lo, hi


class TestDirectionSweep:
    def test_cube_sweep_summary(self):
        rep = direction_sweep(scaled_cube(64), T=2.0, t_grid=np.linspace(0, 2, 11),
                              M=50, N=20_000, seed=41)
        assert 0.0 <= rep.exceedance_fraction <= 1.0
        assert rep.metadata["epsilon"] > 0
        assert len(rep["sup_deviation"]) == 50
        assert rep.metadata["excluded_t"] == []

    def test_sphere_directions_all_equivalent(self):
        # rotation invariance: per-direction sups are pure MC noise around
        # the spherical/normal gap
        n, N = 64, 40_000
        rep = direction_sweep(scaled_sphere(n), T=1.5, t_grid=np.linspace(0, 1.5, 7),
                              M=40, N=N, seed=43)
        gap = np.max(np.abs(refdist.sph_tail(n, np.linspace(0.01, 1.5, 7))
                            / refdist.gauss_tail(np.linspace(0.01, 1.5, 7)) - 1))
        noise = 4 / math.sqrt(N * refdist.gauss_tail(1.5))
        assert np.all(rep["sup_deviation"] <= gap + noise)

    def test_deep_cells_excluded_not_dropped(self):
        rep = direction_sweep(scaled_cube(64), T=4.0, t_grid=np.linspace(0, 4, 9),
                              M=10, N=5_000, seed=47)
        assert len(rep.metadata["excluded_t"]) > 0

    def test_requires_isotropic_normalization(self):
        with pytest.raises(ValueError):
            direction_sweep(BodySpec(kind="lp_volume", n=16, p=math.inf),
                            T=1.0, t_grid=[0.0, 1.0], M=4, N=100, seed=53)

    def test_t_grid_must_cover_T(self):
        with pytest.raises(ValueError):
            direction_sweep(scaled_cube(16), T=3.0, t_grid=[0.0, 1.0], M=4, N=100, seed=59)


class TestLocalSweep:
    def test_sphere_density_sweep(self):
        n = 64
        rep = local_direction_sweep(scaled_sphere(n), T=1.5, h=0.25, M=30,
                                    N=40_000, seed=61)
        assert 0.0 <= rep.exceedance_fraction <= 1.0
        assert rep.metadata["bin_width"] == 0.25

    def test_cube_exceedance_small(self):
        rep = local_direction_sweep(scaled_cube(64), T=1.5, h=0.25, M=40,
                                    N=40_000, seed=67)
        assert rep.exceedance_fraction <= 0.25

    def test_deep_bins_get_excluded(self):
        rep = local_direction_sweep(scaled_cube(16), T=3.0, h=0.05, M=4,
                                    N=20_000, seed=71)
        assert len(rep.metadata["excluded_t"]) > 0

    def test_all_bins_too_small_signals(self):
        with pytest.raises(InsufficientDataError):
            local_direction_sweep(scaled_cube(16), T=3.0, h=0.01, M=4,
                                  N=2_000, seed=71)


class TestBudget:
    def test_unit_example(self):
        assert corollary_T_budget(math.e, 1.0, 1.0) == pytest.approx(math.e ** (1 / 6), rel=1e-12)

    def test_local_to_integral_ratio(self):
        for eps in [0.1, 0.5]:
            ratio = (corollary_T_budget(1e4, eps, 0.3, "local")
                     / corollary_T_budget(1e4, eps, 0.3, "integral"))
            assert ratio == pytest.approx(eps ** (1 / 3), rel=1e-12)

    def test_large_n_value(self):
        T = corollary_T_budget(1e6, 0.1, 0.01)
        denom = math.log(1e6) + math.log(10) + math.log(100)
        assert T == pytest.approx((1e6 * 0.01 / denom) ** (1 / 6), rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            corollary_T_budget(100, 0.0, 0.5)
        with pytest.raises(ValueError):
            corollary_T_budget(100, 0.5, 0.5, mode="global")


class TestDirections:
    def test_deterministic_and_unit(self):
        a = uniform_directions(16, 8, seed=73)
        b = uniform_directions(16, 8, seed=73)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-12)
