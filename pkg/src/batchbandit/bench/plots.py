"""Standalone SVG figures rendered from summaries and histograms."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .summary import regret_histogram  # noqa: E402


def plot_relative_gains(summaries, path, title: str = "") -> None:
    rows = [s for s in summaries if s.relative is not None]
    fig, ax = plt.subplots(figsize=(6, 0.4 * len(rows) + 1.2))
    y = np.arange(len(rows))
    ax.barh(y, [s.relative for s in rows], xerr=[2 * (s.relative_se or 0) for s in rows], color="tab:blue")
    ax.axvline(100.0, color="k", lw=0.8, ls="--")
    ax.set_yticks(y, [s.policy for s in rows])
    ax.set_xlabel("simple regret, % of uniform")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_regret_histograms(samples: dict, path, bins: int = 30, title: str = "") -> None:
    """Overlaid step histograms, one per label, on common bins."""
    upper = max((np.nanmax(v) for v in samples.values() if len(v)), default=1.0)
    fig, ax = plt.subplots(figsize=(6, 4))
    for lab, vals in samples.items():
        h = regret_histogram(vals, bins, upper)
        dens = h.counts / max(h.counts.sum(), 1)
        ax.stairs(dens, h.edges, label=str(lab))
    ax.set_xlabel("simple regret (h scale)")
    ax.set_ylabel("fraction of replications")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
