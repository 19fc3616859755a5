"""Static figures for experiment outputs.

Figures are written as SVG with a fixed hash salt and no date stamp, so
identical data gives byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def setup_style():
    plt.rcParams.update(
        {
            "svg.hashsalt": "lblab",
            "svg.fonttype": "path",
            "font.family": "DejaVu Sans",
            "font.size": 10,
            "axes.grid": True,
            "grid.alpha": 0.3,
            "lines.markersize": 4,
        }
    )


def save(fig, path, manifest_hash: str):
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": f"manifest_sha256={manifest_hash}"})
    plt.close(fig)


def loglog_series(path, series: dict[str, tuple[list, list]], title: str, manifest_hash: str, bands=None):
    """One log-log line per named series; ``bands`` maps a name to ``(n, lo, hi)`` drawn as a shaded interval."""
    setup_style()
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for name, (x, y) in series.items():
        ax.loglog(x, y, marker="o", label=name)
    for name, (x, lo, hi) in (bands or {}).items():
        ax.fill_between(x, lo, hi, alpha=0.25, label=name)
    ax.set_xlabel("n")
    ax.set_ylabel("bound on $b_n$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    save(fig, path, manifest_hash)


def ratio_bars(path, ratios: dict[str, float], title: str, manifest_hash: str):
    setup_style()
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    names = list(ratios)
    ax.bar(range(len(names)), [ratios[k] for k in names])
    ax.set_xticks(range(len(names)), names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("target / source")
    ax.set_title(title)
    fig.tight_layout()
    save(fig, path, manifest_hash)
