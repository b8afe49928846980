"""Plot defaults and the benchmark figure."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib as mpl  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402

golden_ratio = (math.sqrt(5) - 1.0) / 2.0
colors = ["#08589e", "#2b8cbe", "#4eb3d3", "#7bccc4", "#a8ddb5"]

params = {
    "axes.prop_cycle": mpl.cycler(color=colors),
    "axes.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.family": "sans-serif",
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def get_plot(width: float = 5.0, height: float | None = None):
    """A fresh figure and axes with the module defaults applied."""
    mpl.rcParams.update(params)
    if not height:
        height = width * golden_ratio
    fig, ax = plt.subplots(figsize=(width, height), facecolor="w")
    return fig, ax


def plot_bench(rows: list, path: str, title: str = "") -> None:
    """Seconds against token count for each stage, one line per stage, log-log."""
    fig, ax = get_plot()
    xs = [r["tokens"] for r in rows]
    for key, label, marker in (("parse_s", "parser", "o"), ("prune_s", "pruner", "s"),
                               ("first_tree_s", "first tree", "^")):
        ax.plot(xs, [r[key] for r in rows], marker=marker, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("tokens")
    ax.set_ylabel("seconds")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(loc="upper left")
    fig.savefig(path)
    plt.close(fig)
