"""Figure rendering for CLI outputs.

Every figure goes to a file next to the delimited output; nothing is
shown interactively. PNG metadata is pinned so repeated runs produce
byte-identical images.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import CorrelationMatrix
from .scores import MulerReport
from .validation import HybridCurve

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": "muler"}}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def render_report(report: MulerReport, path) -> None:
    """Horizontal bar chart of per-feature scores, best (lowest) on top."""
    scored = [
        e
        for e in report.entries
        if e.muler is not None and not math.isnan(e.muler)
    ]
    scored.sort(key=lambda e: e.muler)
    labels = [f"{e.feature_id} (n={e.index_count})" for e in scored]
    values = [e.muler for e in scored]
    height = max(2.5, 0.35 * len(scored) + 1.2)
    fig, ax = plt.subplots(figsize=(8, height))
    if scored:
        y = np.arange(len(scored))
        ax.barh(y, values, color="#4878a8")
        ax.set_yticks(y)
        ax.set_yticklabels(labels, fontsize=8)
        ax.invert_yaxis()
    else:
        ax.text(0.5, 0.5, "no scored features", ha="center", va="center")
    ax.set_xlabel("MuLER (lower is better)")
    title = report.metadata.get("system", "")
    ax.set_title(f"MuLER report {title}".strip())
    _finish(fig, path)


def render_hybrid(curve: HybridCurve, path) -> None:
    """Hybrid-masking score against the anti-oracle fraction."""
    alphas = [a for a, _ in curve.points]
    scores = [s for _, s in curve.points]
    mx, mn = curve.endpoints
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(alphas, scores, marker="o", color="#4878a8", label="hybrid score")
    ax.axhline(mx, color="#3a923a", linestyle="--", linewidth=1, label="oracle")
    ax.axhline(mn, color="#b04a4a", linestyle="--", linewidth=1, label="anti-oracle")
    ax.set_xlabel("anti-oracle fraction")
    ax.set_ylabel("corpus score")
    ax.set_title(f"hybrid masking: {curve.feature_id}")
    ax.legend(loc="best", fontsize=8)
    _finish(fig, path)


def render_matrix(matrix: CorrelationMatrix, path) -> None:
    """Correlation heatmap; absent cells are hatched grey."""
    rows, cols = matrix.row_labels, matrix.col_labels
    grid = np.full((len(rows), len(cols)), np.nan)
    for i, row in enumerate(rows):
        for j, col in enumerate(cols):
            cell = matrix.cells[(row, col)]
            if cell.value is not None:
                grid[i, j] = cell.value
    fig, ax = plt.subplots(
        figsize=(max(4.0, 0.45 * len(cols) + 2), max(3.0, 0.4 * len(rows) + 1.5))
    )
    cmap = plt.get_cmap("RdBu_r").copy()
    cmap.set_bad("#cccccc")
    im = ax.imshow(grid, cmap=cmap, vmin=-1.0, vmax=1.0, aspect="auto")
    ax.set_xticks(range(len(cols)))
    ax.set_xticklabels(cols, rotation=90, fontsize=7)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(rows, fontsize=8)
    ax.set_title(f"{matrix.y_measure} vs {matrix.x_measure}")
    fig.colorbar(im, ax=ax, shrink=0.8)
    _finish(fig, path)
