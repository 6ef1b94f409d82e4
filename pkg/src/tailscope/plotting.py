"""Figure rendering for the CLI report paths (Agg backend, files only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reporting import ColumnTable


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_refdist(table: ColumnTable, path) -> None:
    """Spherical density against the normal density, linear and log scale."""
    t = table["t"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(t, table["sph_density"], label=r"spherical $\psi_n$")
    ax1.plot(t, table["gauss_density"], "--", label=r"normal $\varphi$")
    ax1.set_xlabel("t")
    ax1.set_ylabel("density")
    ax1.legend()
    with np.errstate(divide="ignore"):
        ax2.semilogy(t, table["sph_tail"], label="spherical tail")
        ax2.semilogy(t, table["gauss_tail"], "--", label="normal tail")
    ax2.set_xlabel("t")
    ax2.set_ylabel("tail")
    ax2.legend()
    n = table.metadata.get("n")
    fig.suptitle(f"reference laws, n={n}")
    _save(fig, path)


def plot_deviation(tables: list[ColumnTable], path, profile=None) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for tab in tables:
        n = int(tab["n"][0])
        mask = tab["p_hat"] > 0
        ax.semilogy(tab["u"][mask], tab["p_hat"][mask], "o-", ms=3, label=f"n={n}")
        if profile is not None:
            u = np.linspace(tab["u"].min(), tab["u"].max(), 200)
            ax.semilogy(u, profile.envelope(n, u), ":", color="gray")
    ax.set_xlabel("u")
    ax.set_ylabel("P{ | |X|/sqrt(n) - 1 | >= u }")
    ax.legend()
    _save(fig, path)


def plot_ratio_report(report: ColumnTable, path) -> None:
    t = report["t"]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.axhline(1.0, color="k", lw=0.8)
    ax.errorbar(t, report["ratio_sph"], yerr=report["stderr"] / report["ref_sph"],
                fmt="o-", ms=3, label="vs spherical")
    ax.errorbar(t, report["ratio_gauss"], yerr=report["stderr"] / report["ref_gauss"],
                fmt="s--", ms=3, label="vs normal")
    if "bound" in report.columns and np.any(np.isfinite(report["bound"])):
        ax.plot(t, 1.0 + report["bound"], ":", color="gray", label="predicted envelope")
        ax.plot(t, 1.0 - report["bound"], ":", color="gray")
    ax.set_xlabel("t")
    ax.set_ylabel("ratio")
    ax.set_title(report.metadata.get("kind", ""))
    ax.legend()
    _save(fig, path)


def plot_sweep(report: ColumnTable, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.hist(report["sup_deviation"], bins=30)
    thr = report.metadata.get("threshold")
    if thr is not None:
        ax.axvline(thr, color="r", ls="--", label=f"10 epsilon = {thr:.3g}")
        ax.legend()
    ax.set_xlabel("per-direction sup deviation")
    ax.set_ylabel("directions")
    frac = report.metadata.get("exceedance_fraction")
    ax.set_title(f"exceedance fraction {frac:.3g}" if frac is not None else "")
    _save(fig, path)


def plot_transform(table: ColumnTable, path) -> None:
    t = table["t"]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    with np.errstate(divide="ignore"):
        ax.semilogy(t, table["avg_tail"], label="averaged tail")
        ax.semilogy(t, table["sph_tail"], "--", label="spherical tail")
        ax.semilogy(t, table["gauss_tail"], ":", label="normal tail")
    ax.set_xlabel("t")
    ax.set_ylabel("tail")
    ax.legend()
    _save(fig, path)
