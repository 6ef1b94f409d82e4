"""tailscope command line: reference tables, samplers, transforms, sweeps, checks.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 verification
failure.  Every stochastic command requires an explicit --seed (no silent
time-based seeding) and writes a ``<output>.provenance.json`` sidecar with
everything needed to reproduce the artifact.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, concentration, experiments, radial, refdist, verify
from .reporting import ColumnTable, write_provenance
from .samplers import (
    NAMED_LAWS,
    BodySpec,
    sample,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_VERIFY = 3


def _parse_grid(text: str) -> np.ndarray:
    """Parse 'lo:hi:steps' into an inclusive linspace."""
    try:
        lo, hi, steps = text.split(":")
        return np.linspace(float(lo), float(hi), int(steps))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected lo:hi:steps, got {text!r}") from exc


def _parse_p(text: str) -> float:
    return math.inf if text in ("inf", "Inf", "INF") else float(text)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("TAILSCOPE_THREADS", "0"))


def _body_spec(args) -> BodySpec:
    kind = args.body.replace("-", "_")
    if kind == "sphere":
        spec = BodySpec(kind="sphere", n=args.n)
    elif kind in ("lp_cone", "lp_volume"):
        if args.p is None:
            raise SystemExit2(f"--p is required for --body {args.body}")
        spec = BodySpec(kind=kind, n=args.n, p=args.p)
    elif kind == "product":
        if args.law not in NAMED_LAWS:
            raise SystemExit2(f"--law must be one of {sorted(NAMED_LAWS)}")
        spec = BodySpec(kind="product", n=args.n, law=NAMED_LAWS[args.law]())
    else:
        raise SystemExit2(f"unknown body {args.body!r}")
    if args.scale == "iso":
        spec = spec.scaled_isotropic()
    elif args.scale is not None:
        spec = spec.scaled(float(args.scale))
    return spec


class SystemExit2(Exception):
    """Usage error discovered after argparse (exit code 2)."""


def _add_body_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--body", required=True,
                   choices=["sphere", "lp-cone", "lp-volume", "product"])
    p.add_argument("--p", type=_parse_p, default=None, help="l_p exponent (or 'inf')")
    p.add_argument("--law", default="rademacher",
                   help=f"coordinate law for --body product: {sorted(NAMED_LAWS)}")
    p.add_argument("--n", type=int, required=True, help="ambient dimension")
    p.add_argument("--scale", default=None,
                   help="divide samples by this constant, or 'iso' for unit "
                        "coordinate variance")


def _write_table(table: ColumnTable, out: Path, fmt: str, args, plot_fn=None) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        table.to_json(out)
    else:
        table.to_csv(out)
    write_provenance(out.with_suffix(out.suffix + ".provenance.json"), {
        "command": " ".join(sys.argv[1:]),
        "parameters": {k: v for k, v in vars(args).items() if k != "func"},
        "metadata": table.metadata,
        "tailscope_version": __version__,
    })
    if plot_fn is not None and args.plot:
        plot_fn(table, out.with_suffix(".svg"))


# ---------------------------------------------------------------- commands


def cmd_refdist(args) -> int:
    if args.n < 3:
        raise SystemExit2("refdist requires --n >= 3")
    if args.t_max <= args.t_min:
        raise SystemExit2("need t-max > t-min")
    t = np.linspace(args.t_min, args.t_max, args.steps)
    n = args.n
    table = ColumnTable(
        columns={
            "t": t,
            "sph_density": refdist.sph_density(n, t),
            "sph_cdf": refdist.sph_cdf(n, t),
            "sph_tail": refdist.sph_tail(n, t),
            "gauss_density": refdist.gauss_density(t),
            "gauss_cdf": refdist.gauss_cdf(t),
            "gauss_tail": refdist.gauss_tail(t),
            "density_ratio": refdist.sph_density(n, t) / refdist.gauss_density(t),
        },
        metadata={"kind": "refdist_grid", "n": n, "cdf_method": refdist.CDF_METHOD})
    from .plotting import plot_refdist
    _write_table(table, Path(args.out), args.format, args, plot_refdist)
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = _body_spec(args)
    batch = sample(spec, args.N, args.seed, threads=_threads(args) or 0)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "bin":
        batch.to_binary(out)
    else:
        batch.to_csv(out)
    write_provenance(out.with_suffix(out.suffix + ".provenance.json"), {
        "command": " ".join(sys.argv[1:]),
        "spec": spec.label(), "N": args.N, "seed": args.seed,
        "chunk_size": batch.chunk_size, "format": args.format,
        "tailscope_version": __version__,
    })
    if args.radial_out:
        batch.radial_projection().to_csv(args.radial_out)
    return EXIT_OK


def cmd_deviation(args) -> int:
    spec = _body_spec(args)
    u = _parse_grid(args.u_grid)
    table = concentration.deviation_curve_streamed(spec, u, args.N, args.seed,
                                                   threads=_threads(args) or 0)
    from .plotting import plot_deviation
    _write_table(table, Path(args.out), args.format, args,
                 lambda t, p: plot_deviation([t], p))
    return EXIT_OK


def cmd_fit(args) -> int:
    tables = []
    for path in args.curves:
        data = np.genfromtxt(path, delimiter=",", names=True)
        tables.append(ColumnTable(columns={
            "n": np.atleast_1d(data["n"]), "u": np.atleast_1d(data["u"]),
            "p_hat": np.atleast_1d(data["p_hat"]),
            "stderr": np.atleast_1d(data["stderr"])}))
    profile = concentration.fit_profile(tables)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        json.dump(profile.to_json_obj(), fh, indent=2)
        fh.write("\n")
    write_provenance(out.with_suffix(out.suffix + ".provenance.json"), {
        "command": " ".join(sys.argv[1:]), "curves": args.curves,
        "tailscope_version": __version__,
    })
    if args.plot:
        from .plotting import plot_deviation
        plot_deviation(tables, out.with_suffix(".svg"), profile=profile)
    print(f"A={profile.A:.6g} B={profile.B:.6g} "
          f"alpha={profile.alpha:.6g} beta={profile.beta:.6g}")
    return EXIT_OK


def cmd_transform(args) -> int:
    rad = radial.RadialDistribution.from_csv(args.n, args.radial)
    t = _parse_grid(args.t_grid)
    table = ColumnTable(
        columns={
            "t": t,
            "avg_tail": np.array([radial.avg_tail(rad, ti) for ti in t]),
            "avg_density": np.array([radial.avg_density(rad, ti) for ti in t]),
            "sph_tail": refdist.sph_tail(args.n, t),
            "sph_density": refdist.sph_density(args.n, t),
            "gauss_tail": refdist.gauss_tail(t),
            "gauss_density": refdist.gauss_density(t),
        },
        metadata={"kind": "radial_transform", "n": args.n,
                  "radial_csv": str(args.radial), "atoms": len(rad.radii)})
    from .plotting import plot_transform
    _write_table(table, Path(args.out), args.format, args, plot_transform)
    return EXIT_OK


def cmd_avg_marginal(args) -> int:
    spec = _body_spec(args)
    t = _parse_grid(args.t_grid)
    if args.quantity == "density":
        report = experiments.estimate_avg_density(spec, t, args.N, args.seed,
                                                  threads=_threads(args) or 0)
    else:
        report = experiments.estimate_avg_tail(spec, t, args.N, args.seed,
                                               method=args.method,
                                               threads=_threads(args) or 0)
    from .plotting import plot_ratio_report
    _write_table(report, Path(args.out), args.format, args, plot_ratio_report)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _body_spec(args)
    threads = _threads(args) or 0
    if args.local:
        report = experiments.local_direction_sweep(
            spec, T=args.T, h=args.bin_width, M=args.M, N=args.N,
            seed=args.seed, threads=threads)
    else:
        t = np.linspace(0.0, args.T, args.t_steps)
        report = experiments.direction_sweep(
            spec, T=args.T, t_grid=t, M=args.M, N=args.N, seed=args.seed,
            threads=threads)
    from .plotting import plot_sweep
    _write_table(report, Path(args.out), args.format, args, plot_sweep)
    return EXIT_OK


def cmd_budget(args) -> int:
    T = experiments.corollary_T_budget(args.n, args.eps, args.zeta,
                                       mode=args.mode, c1=args.c1)
    print("%.17g" % T)
    return EXIT_OK


def cmd_verify(args) -> int:
    if not args.all and args.lemma is None:
        raise SystemExit2("pass --lemma NAME or --all")
    names = list(verify.CHECKS) if args.all else [args.lemma]
    ok = True
    for name in names:
        if name not in verify.CHECKS:
            raise SystemExit2(f"unknown check {name!r}; known: {sorted(verify.CHECKS)}")
        if name == "lapl" and args.beta is not None:
            b = args.beta
            result = verify.check_lapl(
                betas_small=(b,) if b <= 1 else (),
                betas_large=(b,) if b > 1 else ())
        else:
            result = verify.CHECKS[name]()
        print(result.line())
        if result.summary:
            print(f"       {json.dumps(result.summary)}")
        ok = ok and result.passed
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tailscope", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, stochastic=False, output=True):
        if stochastic:
            p.add_argument("--seed", type=int, required=True,
                           help="RNG seed (required; runs must be reproducible)")
            p.add_argument("--N", type=int, required=True, help="sample count")
        if output:
            p.add_argument("--out", required=True, help="output file")
            p.add_argument("--format", choices=["csv", "json"], default="csv")
            p.add_argument("--plot", action="store_true",
                           help="also render an SVG figure next to the output")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (0 = serial; default from TAILSCOPE_THREADS)")

    p = sub.add_parser("refdist", help="tabulate the reference laws on a t grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=201)
    common(p)
    p.set_defaults(func=cmd_refdist)

    p = sub.add_parser("sample", help="draw a seeded sample batch")
    _add_body_flags(p)
    common(p, stochastic=True, output=False)
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--format", choices=["csv", "bin"], default="csv")
    p.add_argument("--radial-out", default=None,
                   help="also write the radial projection CSV (r_over_sqrt_n)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("deviation", help="empirical norm-deviation curve")
    _add_body_flags(p)
    p.add_argument("--u-grid", default="0.02:0.5:13", help="lo:hi:steps")
    common(p, stochastic=True)
    p.set_defaults(func=cmd_deviation)

    p = sub.add_parser("fit", help="fit a concentration profile to deviation CSVs")
    p.add_argument("curves", nargs="+", help="deviation CSVs (n,u,p_hat,stderr)")
    p.add_argument("--out", required=True, help="profile JSON output")
    p.add_argument("--plot", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transform", help="average marginal from a radial CSV")
    p.add_argument("--radial", required=True, help="CSV with header r_over_sqrt_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t-grid", default="0:3:31", help="lo:hi:steps")
    common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("avg-marginal", help="estimate the average marginal from samples")
    _add_body_flags(p)
    p.add_argument("--t-grid", default="0.5:3:11", help="lo:hi:steps")
    p.add_argument("--method", choices=["bv_from_radial", "direct_mc"],
                   default="bv_from_radial")
    p.add_argument("--quantity", choices=["tail", "density"], default="tail")
    common(p, stochastic=True)
    p.set_defaults(func=cmd_avg_marginal)

    p = sub.add_parser("sweep", help="direction sweep against the normal law")
    _add_body_flags(p)
    p.add_argument("--T", type=float, required=True, help="sweep horizon")
    p.add_argument("--M", type=int, required=True, help="number of directions")
    p.add_argument("--t-steps", type=int, default=21)
    p.add_argument("--local", action="store_true", help="density (histogram) flavor")
    p.add_argument("--bin-width", type=float, default=0.1)
    common(p, stochastic=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("budget", help="sweep-horizon budget from (n, eps, zeta)")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--mode", choices=["integral", "local"], default="integral")
    p.add_argument("--c1", type=float, default=1.0)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("verify", help="run the named inequality checks")
    p.add_argument("--lemma", default=None,
                   help=f"one of {sorted(verify.CHECKS)}")
    p.add_argument("--all", action="store_true", help="run every check")
    p.add_argument("--beta", type=float, default=None,
                   help="restrict the lapl check to one beta")
    p.set_defaults(func=cmd_verify)

    return ap


def _validate_outputs(args) -> None:
    # fail on unwritable destinations before any long computation starts
    for attr in ("out", "radial_out"):
        value = getattr(args, attr, None)
        if value is None:
            continue
        path = Path(value)
        path.parent.mkdir(parents=True, exist_ok=True)
        if not os.access(path.parent, os.W_OK):
            raise SystemExit2(f"output directory {path.parent} is not writable")
        if path.exists() and not os.access(path, os.W_OK):
            raise SystemExit2(f"output file {path} is not writable")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _validate_outputs(args)
        return args.func(args)
    except SystemExit2 as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
