"""Matplotlib rendering of the variance-vs-angle figures.

The simulate report path writes these PNGs next to the CSV/JSON artifacts;
``curves --figures`` renders the analytic curves alone.  matplotlib is
imported lazily so the numeric paths never pay for it.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import analytics
from .model import VarianceReport


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _angle_grid(reports: list[VarianceReport], points: int = 181) -> np.ndarray:
    phis = [r.phi for r in reports] or [0.0, math.pi]
    lo, hi = min(phis), max(phis)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, points)


def render_report_figures(
    reports: list[VarianceReport],
    kappa: float,
    outdir: Path,
    loss_epsilon: float = 0.0,
) -> list[Path]:
    """Render the three standard figures for one campaign.

    Monte Carlo estimates are drawn as points with their statistical error
    bars; solid lines are the model curves at the same kappa (and loss).
    Returns the list of files written.
    """
    plt = _pyplot()
    outdir = Path(outdir)
    squeezed = [r for r in reports if not r.control]
    control = [r for r in reports if r.control]
    grid = _angle_grid(squeezed or control)
    curves = [analytics.protocol_variances(kappa, p, loss_epsilon) for p in grid]
    written = []

    def points(ax, reps, key, err_key, color, label):
        if not reps:
            return
        x = [r.phi for r in reps]
        y = [getattr(r, key) for r in reps]
        e = [getattr(r, err_key) for r in reps] if err_key else None
        ax.errorbar(x, y, yerr=e, fmt="o", ms=4, color=color, capsize=2, label=label)

    # Sum/difference variances
    fig, ax = plt.subplots(figsize=(6, 4))
    points(ax, squeezed, "v_plus", "dv_plus", "tab:red", "V+ (MC)")
    points(ax, squeezed, "v_minus", "dv_minus", "tab:blue", "V- (MC)")
    ax.plot(grid, [c["v_plus"] for c in curves], "--", color="tab:red", label="V+ model")
    ax.plot(grid, [c["v_minus"] for c in curves], "-.", color="tab:blue", label="V- model")
    ax.axhline(0.5, color="gray", lw=0.8)
    ax.set_xlabel("rotation angle (rad)")
    ax.set_ylabel("variance")
    ax.legend(fontsize="small")
    fig.tight_layout()
    path = outdir / "variance_sum_diff.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    # Second-pulse variance (back-action peak)
    fig, ax = plt.subplots(figsize=(6, 4))
    points(ax, squeezed, "v2", "dv2", "tab:green", "V2 (MC)")
    ax.plot(grid, [c["v2"] for c in curves], ":", color="tab:green", label="V2 model")
    ax.axhline(0.5, color="gray", lw=0.8)
    ax.set_xlabel("rotation angle (rad)")
    ax.set_ylabel("variance")
    ax.legend(fontsize="small")
    fig.tight_layout()
    path = outdir / "variance_second_pulse.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    # Conditional variance of the squeezed runs vs the coherent control
    fig, ax = plt.subplots(figsize=(6, 4))
    conditioned = [r for r in squeezed if r.v_cond is not None]
    points(ax, conditioned, "v_cond", None, "black", "V_cond (MC)")
    points(ax, control, "v2", "dv2", "tab:orange", "coherent control (MC)")
    ax.plot(grid, [c["v_cond"] for c in curves], "-.", color="black", label="V_cond model")
    ax.plot(grid, [c["v_coh"] for c in curves], "-", color="tab:orange", label="V_coh model")
    ax.axhline(0.5, color="gray", lw=0.8, label="shot noise")
    ax.set_xlabel("rotation angle (rad)")
    ax.set_ylabel("variance")
    ax.legend(fontsize="small")
    fig.tight_layout()
    path = outdir / "conditional_variance.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written


def render_curves_figure(
    kappa: float,
    angles: np.ndarray,
    outpath: Path,
    loss_epsilon: float = 0.0,
) -> Path:
    """Single figure with all six analytic curves over the given grid."""
    plt = _pyplot()
    rows = [analytics.protocol_variances(kappa, p, loss_epsilon) for p in angles]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    styles = {
        "v1": ("-", "tab:gray"),
        "v2": (":", "tab:green"),
        "v_plus": ("--", "tab:red"),
        "v_minus": ("-.", "tab:blue"),
        "v_cond": ("-", "black"),
        "v_coh": ("-", "tab:orange"),
    }
    for key, (ls, color) in styles.items():
        ax.plot(angles, [r[key] for r in rows], ls, color=color, label=key)
    ax.axhline(0.5, color="gray", lw=0.8)
    ax.set_xlabel("rotation angle (rad)")
    ax.set_ylabel("variance")
    ax.legend(fontsize="small", ncol=2)
    fig.tight_layout()
    outpath = Path(outpath)
    fig.savefig(outpath, dpi=150)
    plt.close(fig)
    return outpath
