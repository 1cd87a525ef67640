"""Figure rendering for run outputs.

Renders matplotlib figures to files alongside the delimited series output;
never opens a window (Agg backend).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

from .diagnostics import DiagnosticsSeries  # noqa: E402

__all__ = ["render_series_figures", "render_profile_figure"]


def render_series_figures(series: DiagnosticsSeries, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = np.asarray(series.times)
    written = []

    fig, axes = plt.subplots(2, 2, figsize=(10, 7), constrained_layout=True)
    axes[0, 0].plot(t, series.energy)
    axes[0, 0].set_title("energy E(t)")
    axes[0, 1].plot(t, series.h_norm)
    axes[0, 1].set_title("energy-space norm")
    axes[1, 0].plot(t, series.strichartz_accum, label="space-time accum")
    axes[1, 0].plot(t, series.morawetz_accum, label="weighted accum")
    axes[1, 0].legend()
    axes[1, 0].set_title("accumulators")
    axes[1, 1].plot(t, series.exterior_energy)
    axes[1, 1].set_title("exterior energy")
    for ax in axes.flat:
        ax.set_xlabel("t")
    path = outdir / "series.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    pos = t > 0
    if pos.sum() >= 2:
        fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
        ax.loglog(t[pos], np.asarray(series.linf)[pos])
        ax.set_xlabel("t")
        ax.set_ylabel(r"$\|u\|_\infty$")
        ax.set_title("sup-norm decay")
        path = outdir / "decay.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def render_profile_figure(dec, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
    stages = np.arange(len(dec.remainder_h_norms))
    ax.semilogy(stages, dec.remainder_h_norms, "o-", label="energy norm")
    ax.semilogy(stages, dec.remainder_lq_norms, "s-", label="L^q norm")
    ax.set_xlabel("extraction stage")
    ax.set_ylabel("remainder norm (RMS)")
    ax.legend()
    path = outdir / "remainders.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
