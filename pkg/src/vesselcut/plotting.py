"""Matplotlib figures for segmentation results and sweep reports.

Figures are drawn on standalone ``Figure`` objects with the Agg canvas, so
nothing here touches pyplot's global state.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

FIG_WIDTH = 7.0
GOLDEN = (np.sqrt(5) - 1.0) / 2.0


def _new_figure(ncols=1, width=FIG_WIDTH, height=None):
    fig = Figure(figsize=(width, height or width * GOLDEN))
    FigureCanvasAgg(fig)
    axes = [fig.add_subplot(1, ncols, i + 1) for i in range(ncols)]
    return fig, axes


def plot_segmentation(path, image, labeling, curve, ground_truth=None, title=None):
    """Input image with boundary, next to the phase map."""
    fig, (ax_img, ax_lab) = _new_figure(ncols=2, height=FIG_WIDTH * 0.45)
    img = np.asarray(image)
    ax_img.imshow(img, cmap="gray" if img.ndim == 2 else None, vmin=0, vmax=255)
    cols = np.arange(len(curve.rows))
    pred = curve.as_array()
    ax_img.plot(cols, pred, color="red", lw=1.2, label="detected")
    if ground_truth is not None:
        gt = np.array([np.nan if r is None else r for r in ground_truth], dtype=float)
        ax_img.plot(cols, gt, color="cyan", lw=1.0, ls="--", label="truth")
    ax_img.legend(loc="upper right", fontsize=7, frameon=False)
    ax_img.set_axis_off()

    phase = np.zeros(labeling.inside.shape)
    phase[labeling.air] = 1
    phase[labeling.material] = 2
    ax_lab.imshow(phase, cmap="viridis", vmin=0, vmax=2, interpolation="nearest")
    ax_lab.set_title("material / air", fontsize=9)
    ax_lab.set_axis_off()
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def plot_sweep(path, report):
    """Detection rate against sigma, one line per class, LINEAR as dashes."""
    fig, (ax,) = _new_figure()
    exp_rows = [r for r in report.rows if r.setting != "LINEAR"]
    linear = [r for r in report.rows if r.setting == "LINEAR"]
    sigmas = [float(r.setting) for r in exp_rows]
    for attr, color, label in (("liquids", "tab:blue", "liquids"), ("solids", "tab:brown", "solids")):
        rates = [getattr(r, attr) for r in exp_rows]
        if sigmas and any(x is not None for x in rates):
            ys = [np.nan if x is None else 100 * x for x in rates]
            ax.plot(sigmas, ys, marker="o", color=color, label=f"{label}, exponential")
        if linear and getattr(linear[0], attr) is not None:
            ax.axhline(100 * getattr(linear[0], attr), color=color, ls="--", lw=1,
                       label=f"{label}, linear")
    ax.set_xlabel("sigma (intensity units)")
    ax.set_ylabel("detection rate (%)")
    ax.set_ylim(-2, 102)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path
