"""Figures written next to the CSV outputs."""

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# keep PNG bytes independent of the matplotlib version
_PNG_META = {"Software": None}

STYLE = {
    "full": {"color": "#1f77b4", "linestyle": "-"},
    "denoise-only": {"color": "#ff7f0e", "linestyle": "--"},
    "metallaxis": {"color": "#2ca02c", "linestyle": ":"},
}


def _save(fig, path):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, format="png", dpi=120, metadata=_PNG_META)
    plt.close(fig)
    os.replace(tmp, path)
    return path


def plot_exam_curves(curves, path, title="", max_exam=1.0):
    """``curves`` maps a label to ``[(exam_threshold, fraction_localized), ...]``."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, points in curves.items():
        xs = [p[0] for p in points if p[0] <= max_exam]
        ys = [p[1] for p in points if p[0] <= max_exam]
        ax.step(xs, ys, where="post", label=label, **STYLE.get(label, {}))
    ax.set_xlabel("EXAM")
    ax.set_ylabel("fraction of faults localized")
    ax.set_xlim(0, max_exam)
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_matrices(panels, path):
    """Side-by-side heatmaps; ``panels`` is a list of ``(title, 2D array)``."""
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 4), squeeze=False)
    for ax, (title, cells) in zip(axes[0], panels):
        im = ax.imshow(cells, aspect="auto", interpolation="nearest", cmap="viridis")
        ax.set_title(title)
        ax.set_xlabel("test")
        ax.set_ylabel("mutant")
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    return _save(fig, path)
