"""Figures for the report subcommands, written to image files."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def overlap_heatmap(matrix, path, title="Token overlap between fallacy types (%)"):
    k = len(matrix.labels)
    size = max(4.0, 0.42 * k + 1.5)
    fig, ax = plt.subplots(figsize=(size, size * 0.9))
    data = np.ma.masked_invalid(matrix.cells)
    off = data.copy()
    off[np.arange(k), np.arange(k)] = np.ma.masked
    im = ax.imshow(off, cmap="Reds", vmin=0, vmax=100)
    for i in range(k):
        for j in range(k):
            v = matrix.cells[i, j]
            if math.isnan(v):
                continue
            ax.text(j, i, f"{v:.0f}", ha="center", va="center",
                    fontsize=7, color="black" if i == j or v < 60 else "white")
    ax.set_xticks(range(k), matrix.labels, rotation=90)
    ax.set_yticks(range(k), matrix.labels)
    ax.set_title(title)
    fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    _save(fig, path)


def span_counts(report, path):
    """Grouped bars of span counts per fallacy, one group member per view."""
    labels = list(report.combined.per_label)
    views = report.views
    x = np.arange(len(labels))
    width = 0.8 / max(1, len(views))
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(labels) + 2), 4))
    for i, v in enumerate(views):
        counts = [report.per_view[v].per_label[c].count for c in labels]
        ax.bar(x + (i - (len(views) - 1) / 2) * width, counts, width, label=v)
    ax.set_xticks(x, labels, rotation=90)
    ax.set_ylabel("spans")
    ax.legend()
    _save(fig, path)


def view_scores(report, path):
    """P/R/F1 bars per gold view plus the aggregate."""
    names = list(report.view_ids) + ["aggregate"]
    triples = [report.per_view[v] for v in report.view_ids] + [report.aggregate]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(names) + 2), 3.5))
    for i, key in enumerate(("precision", "recall", "f1")):
        ax.bar(x + (i - 1) * 0.26, [getattr(t, key) for t in triples], 0.26, label=key)
    ax.set_xticks(x, names)
    ax.set_ylim(0, 1)
    ax.set_title(f"{report.config.task.value} ({report.config.mode})")
    ax.legend()
    _save(fig, path)
