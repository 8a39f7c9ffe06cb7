"""Figure rendering for CLI reports.

Each function takes report data and a target path and writes one PNG; the
Agg backend keeps everything headless.  Figures accompany the JSON/CSV
artifacts of a run, they are never required by the numerics.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .kmk import kmk_density

DPI = 150


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_measure(measure, path, params=None):
    """Atoms (trace mass) and, when present, the trace of the AC density."""
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    if len(measure.atom_locations):
        masses = [float(np.trace(w).real) for w in measure.atom_weights]
        ax.stem(measure.atom_locations, masses, basefmt=" ")
    if measure.ac_nodes is not None:
        dens = [float(np.trace(d).real) for d in measure.ac_densities]
        ax.plot(measure.ac_nodes, dens, lw=1.0, color="tab:orange", label="ac density trace")
    if params is not None:
        xs = np.linspace(params.u_minus + 1e-9, params.u_plus - 1e-9, 400)
        ax.plot(xs, measure.dim * kmk_density(params, xs), "k--", lw=0.8, label="KMK reference")
    ax.set_xlabel("x")
    ax.set_ylabel("trace mass / density")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False, fontsize=8)
    _finish(fig, path)


def plot_canonical(canon, path, params=None):
    """Eigenvalues of the Hermitian canonical moments by index."""
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    for k in range(canon.length):
        lam = np.linalg.eigvalsh(canon.u_herm[k])
        ax.plot([k + 1] * len(lam), lam, "o", ms=4, color="tab:blue", alpha=0.7)
    if params is not None:
        ks = np.arange(1, canon.length + 1)
        ax.plot(ks, np.where(ks % 2 == 1, params.u_odd, params.u_even), "k_",
                ms=10, label="KMK centers")
        ax.legend(frameon=False, fontsize=8)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("canonical index k")
    ax.set_ylabel("spectrum of Hermitian canonical moment")
    _finish(fig, path)


def plot_identities(reports, path):
    """Log-scale residual bars, one per identity check."""
    fig, ax = plt.subplots(figsize=(6.0, 0.5 + 0.4 * len(reports)))
    names = [r.name for r in reports]
    vals = [max(r.residual, 1e-18) for r in reports]
    colors = ["tab:green" if r.passed else "tab:red" for r in reports]
    ax.barh(range(len(reports)), vals, color=colors)
    ax.set_yticks(range(len(reports)), names, fontsize=7)
    ax.set_xscale("log")
    ax.set_xlabel("residual")
    _finish(fig, path)


def plot_sumrule(report, path):
    """Coefficient-side partial sums against the measure-side level."""
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    partials = list(report.coefficient_side.partial_sums)
    finite_partials = [x for x in partials if math.isfinite(x)]
    ax.plot(range(1, len(finite_partials) + 1), finite_partials, "o-", ms=3,
            label="coefficient side (partial sums)")
    total = report.measure_side.total
    if math.isfinite(total):
        ax.axhline(total, color="k", ls="--", lw=0.8, label="measure side")
    else:
        ax.set_title("measure side infinite", fontsize=8)
    ax.set_xlabel("pair index")
    ax.set_ylabel("value")
    ax.legend(frameon=False, fontsize=8)
    _finish(fig, path)


def plot_mc(report, path):
    """z-scores per cell with the tolerance band."""
    fig, ax = plt.subplots(figsize=(max(6.0, 0.3 * len(report.cells)), 3.2))
    zs = [c.z for c in report.cells]
    labels = [f"{c.label}:{c.statistic}" for c in report.cells]
    colors = ["tab:green" if c.passed else "tab:red" for c in report.cells]
    ax.bar(range(len(zs)), zs, color=colors)
    ax.axhline(4.0, color="k", ls=":", lw=0.8)
    ax.axhline(-4.0, color="k", ls=":", lw=0.8)
    ax.set_xticks(range(len(zs)), labels, rotation=90, fontsize=6)
    ax.set_ylabel("z")
    _finish(fig, path)
