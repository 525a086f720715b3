"""Trajectory figures: reconstruction error and noise-variance estimates.

One figure per true noise variance, two panels: the left shows the
phase-corrected error per outer iteration on a log scale, the right the
noise-variance trajectory with a horizontal line at the truth.  One curve
per initialization (median across seeds at each iteration).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
# fixed hash salt so repeated renders produce identical SVG element ids
matplotlib.rcParams["svg.hashsalt"] = "plotkit"

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_trajectories"]


def _median_curves(rows, value_col):
    """Per-initialization median trajectory over seeds: {init: (iters, values)}."""
    inits = sorted({row["sigma_init"] for row in rows})
    curves = {}
    for init in inits:
        sub = [r for r in rows if r["sigma_init"] == init]
        iters = sorted({r["em_iter"] for r in sub})
        med = [
            float(np.median([r[value_col] for r in sub if r["em_iter"] == it]))
            for it in iters
        ]
        curves[init] = (iters, med)
    return curves


def plot_trajectories(table, out_dir, fmt="png"):
    """Render one figure per true noise variance; returns the file paths."""
    if fmt not in ("png", "svg"):
        raise ValueError(f"unsupported figure format {fmt!r}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for sigma in table.sigma_values:
        rows = table.for_sigma(sigma)
        fig, (ax_err, ax_nu) = plt.subplots(1, 2, figsize=(10.0, 4.0))

        for init, (iters, med) in _median_curves(rows, "nmse").items():
            ax_err.semilogy(iters, med, marker="o", markersize=3, label=f"init {init:g}")
        ax_err.set_xlabel("outer iteration")
        ax_err.set_ylabel("phase-corrected NMSE")
        ax_err.set_title("reconstruction error")
        ax_err.legend(fontsize=8)

        for init, (iters, med) in _median_curves(rows, "nu_hat").items():
            ax_nu.plot(iters, med, marker="o", markersize=3, label=f"init {init:g}")
        ax_nu.axhline(sigma, color="black", linestyle="--", linewidth=1.0, label="truth")
        ax_nu.set_xlabel("outer iteration")
        ax_nu.set_ylabel("noise-variance estimate")
        ax_nu.set_title(f"true variance {sigma:g}")
        ax_nu.legend(fontsize=8)

        fig.tight_layout()
        path = out_dir / f"trajectories_sigma_{sigma:g}.{fmt}"
        # strip volatile metadata so identical inputs give identical files
        metadata = {"Date": None} if fmt == "svg" else {}
        fig.savefig(path, dpi=150, metadata=metadata)
        plt.close(fig)
        written.append(path)
    return written
