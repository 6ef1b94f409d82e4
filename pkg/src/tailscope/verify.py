"""Named inequality checks exposed through ``tailscope verify``.

Each check sweeps a documented grid, compares against either an explicit
constant or a recorded envelope from :mod:`tailscope.fixtures`, and returns
the first failing cell when one exists.  Check names are the short slugs the
CLI accepts: sph, sphder, logder, normal, lapl, sphere_conc, sc2v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import concentration, fixtures, laplace, refdist


@dataclass
class CheckResult:
    name: str
    passed: bool
    cells: int
    first_failure: str = ""
    summary: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.first_failure}]" if self.first_failure else ""
        return f"{status}  {self.name}  ({self.cells} cells){extra}"


def check_sph(n_values=(64, 256, 1024, 4096), points: int = 40) -> CheckResult:
    """Fourth-order comparison of the spherical and normal laws.

    |log(psi_n(t)/phi(t)) + t^4/(4n)| <= 2 (t^2/n + t^6/n^2) on
    t in [FOURTH_ORDER_T_MIN, n^0.3]; below that t the additive
    normalization offset makes the envelope unreachable (see fixtures).
    """
    cells = 0
    for n in n_values:
        t = np.linspace(fixtures.FOURTH_ORDER_T_MIN, n ** 0.3, points)
        diag, env = refdist.fourth_order_diagnostic(n, t)
        cells += len(t)
        bad = np.abs(diag) > env
        if np.any(bad):
            i = int(np.argmax(bad))
            return CheckResult("sph", False, cells,
                               f"n={n} t={t[i]:.4f} |D|={abs(diag[i]):.3e} > {env[i]:.3e}")
    return CheckResult("sph", True, cells)


def check_sphder(n_values=fixtures.TAIL_HAZARD_SCAN_NS, points: int = 200,
                 slope_points: int = 100, seed: int = 11) -> CheckResult:
    """Tail-vs-hazard ratio inside the recorded envelope; analytic log-slope
    against centered finite differences (relative error 1e-6)."""
    cells = 0
    worst = 0.0
    for n in n_values:
        t = np.linspace(1.0, math.sqrt(n / 8.0), points)
        ratio = refdist.sph_tail(n, t) / (refdist.sph_density(n, t) / t)
        m = float(max(ratio.max(), (1.0 / ratio).max()))
        worst = max(worst, m)
        cells += len(t)
        if m > fixtures.TAIL_HAZARD_ENVELOPE * 1.001 or m >= 10.0:
            i = int(np.argmax(np.maximum(ratio, 1 / ratio)))
            return CheckResult("sphder", False, cells,
                               f"n={n} t={t[i]:.3f} ratio={m:.4f}")
    rng = np.random.default_rng(seed)
    for _ in range(slope_points):
        n = int(rng.choice(n_values))
        t = rng.uniform(0.05, 0.999 * math.sqrt(n / 8.0))
        h = 1e-5 * max(1.0, abs(t))
        fd = (refdist.sph_log_density(n, t + h) - refdist.sph_log_density(n, t - h)) / (2 * h)
        an = refdist.sph_log_slope(n, t)
        cells += 1
        if abs(fd - an) > 1e-6 * max(abs(an), 1e-3):
            return CheckResult("sphder", False, cells,
                               f"slope mismatch at n={n} t={t:.4f}: {an} vs fd {fd}")
    return CheckResult("sphder", True, cells, summary={"ratio_envelope": worst})


def check_logder(n_values=(16, 64, 256, 1024, 4096), draws: int = 2000,
                 seed: int = 5) -> CheckResult:
    """Normalized shift log-ratio stays inside the recorded positive band."""
    rng = np.random.default_rng(seed)
    cells = 0
    lo_obs, hi_obs = math.inf, 0.0
    for n in n_values:
        for _ in range(draws):
            u = rng.uniform(0.0, 1.0)
            t = rng.uniform(1e-3, 0.999 * math.sqrt(n / (2.0 * (1 + u) ** 2)))
            r = refdist.sph_shift_ratio(n, t, u)
            cells += 1
            lo_obs, hi_obs = min(lo_obs, r), max(hi_obs, r)
            if not (fixtures.SHIFT_RATIO_LO - 1e-9 <= r <= fixtures.SHIFT_RATIO_HI + 1e-9):
                return CheckResult("logder", False, cells,
                                   f"n={n} t={t:.4f} u={u:.4f} ratio={r:.4f}")
    return CheckResult("logder", True, cells,
                       summary={"observed_band": [lo_obs, hi_obs]})


def check_normal() -> CheckResult:
    """Shift inequality within the factor-2 envelope; hazard bound with C=1."""
    cells = 0
    for t in np.geomspace(0.01, 12.0, 120):
        for s in np.linspace(0.0, 5.0, 120):
            lhs, rhs = refdist.gauss_shift_bound(float(t), float(s))
            cells += 1
            if lhs > fixtures.GAUSS_SHIFT_ENVELOPE * rhs * (1 + 1e-12):
                return CheckResult("normal", False, cells,
                                   f"t={t:.3f} s={s:.3f} lhs/rhs={lhs / rhs:.4f}")
    for t in np.linspace(1.0, 38.0, 200):
        tail = math.exp(refdist.gauss_log_tail(float(t)))
        bound = math.exp(-0.5 * t * t) / t
        cells += 1
        if tail > bound:
            return CheckResult("normal", False, cells, f"hazard bound fails at t={t:.3f}")
    return CheckResult("normal", True, cells)


def check_lapl(betas_small=(0.3, 0.5, 0.8, 1.0), betas_large=(1.5, 2.0, 3.0),
               seed: int = 3) -> CheckResult:
    """Closed form at beta=1; explicit envelope for beta<=1; grid sup for beta>1."""
    rng = np.random.default_rng(seed)
    cells = 0
    for _ in range(50):
        L = rng.uniform(0.5, 50.0)
        K = rng.uniform(0.0, min(L * 0.49, 20.0))
        got = laplace.integral_I(laplace.LaplaceParams(K=K, L=L, beta=1.0))
        want = laplace.closed_form_beta1(K, L)
        cells += 1
        if abs(got - want) > 1e-8:
            return CheckResult("lapl", False, cells,
                               f"beta=1 closed form: K={K:.3f} L={L:.3f} {got} vs {want}")
    for beta in betas_small:
        env = laplace.case2_constant(beta)
        for K in fixtures.CASE1_SCAN_K:
            for L in fixtures.CASE1_SCAN_L:
                if K / L < 0.5:
                    chk = laplace.bound_check(laplace.LaplaceParams(K=K, L=L, beta=beta))
                    cells += 1
                    if chk.lhs > env * K ** max(beta, 1.0) / L * (1 + 1e-9):
                        return CheckResult(
                            "lapl", False, cells,
                            f"beta={beta} K={K} L={L} ratio={chk.ratio:.3f} > {env:.3f}")
    sups = {}
    for beta in betas_large:
        sup, rows = laplace.case1_ratio_scan(beta, fixtures.CASE1_SCAN_K,
                                             fixtures.CASE1_SCAN_L)
        cells += len(rows)
        if not math.isfinite(sup):
            return CheckResult("lapl", False, cells, f"beta={beta}: ratio sup not finite")
        sups[beta] = sup
    return CheckResult("lapl", True, cells, summary={"case1_ratio_sup": sups})


def check_sphere_conc(n_values=(8, 32, 128, 512)) -> CheckResult:
    """Half-sphere extension bound sigma(A)(1 - sigma(A_gamma)) <= e^{-(n-1)g^2/4}."""
    gammas = np.arange(0.1, 1.0001, 0.1)
    cells = 0
    for n in n_values:
        table = concentration.sphere_cap_check(n, gammas)
        cells += len(gammas)
        holds = table["holds"]
        if not np.all(holds):
            i = int(np.argmin(holds))
            return CheckResult("sphere_conc", False, cells,
                               f"n={n} gamma={gammas[i]:.1f} "
                               f"lhs={table['lhs'][i]:.3e} > rhs={table['rhs'][i]:.3e}")
    return CheckResult("sphere_conc", True, cells)


def check_sc2v(draws: int = 500, seed: int = 9) -> CheckResult:
    """Profile transfer arithmetic: exponents (min(alpha,1), max(beta,1)), A',B' > 0."""
    rng = np.random.default_rng(seed)
    cells = 0
    for _ in range(draws):
        prof = concentration.ConcentrationProfile(
            A=rng.uniform(0.1, 5.0), B=rng.uniform(0.1, 5.0),
            alpha=rng.uniform(0.1, 3.0), beta=rng.uniform(0.1, 3.0))
        out = concentration.transfer_profile(prof, "cone" if rng.random() < 0.5 else "surface")
        cells += 1
        ok = (out.alpha == min(prof.alpha, 1.0) and out.beta == max(prof.beta, 1.0)
              and out.A > 0 and out.B > 0)
        if not ok:
            return CheckResult("sc2v", False, cells, f"transfer broke on {prof}")
    return CheckResult("sc2v", True, cells)


CHECKS = {
    "sph": check_sph,
    "sphder": check_sphder,
    "logder": check_logder,
    "normal": check_normal,
    "lapl": check_lapl,
    "sphere_conc": check_sphere_conc,
    "sc2v": check_sc2v,
}


def run_checks(names=None) -> list[CheckResult]:
    names = list(CHECKS) if names is None else list(names)
    return [CHECKS[name]() for name in names]
