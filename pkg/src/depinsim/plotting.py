"""Report figures, written straight to files with the Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    # keep output stable across runs
    "svg.hashsalt": "depinsim",
}
DARK, LIGHT = "0.35", "0.85"


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path


def duration_violins(samples: Mapping[str, Sequence[float]], path, title="CPU-intensive benchmark") -> Path:
    """One violin per platform, ordered by mean duration."""
    names = sorted((k for k in samples if len(samples[k])), key=lambda k: sum(samples[k]) / len(samples[k]))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(3.0, 1.1 * len(names) + 1), 3.2))
        if names:
            parts = ax.violinplot([list(samples[n]) for n in names], showmeans=True, showextrema=True)
            for body in parts["bodies"]:
                body.set_facecolor(LIGHT)
                body.set_edgecolor(DARK)
                body.set_alpha(1.0)
            for key in ("cmeans", "cmins", "cmaxes", "cbars"):
                parts[key].set_color(DARK)
                parts[key].set_linewidth(0.8)
            ax.set_xticks(range(1, len(names) + 1))
            ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel("Duration [ms]")
        ax.set_title(title)
        return _save(fig, path)


def country_bars(histogram: Mapping[str, int], path) -> Path:
    countries = sorted(histogram)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.5, 2.4))
        bars = ax.bar(countries, [histogram[c] for c in countries], color=DARK, edgecolor="black", linewidth=0.5)
        ax.bar_label(bars, padding=1, fontsize=7)
        ax.set_ylabel("# client nodes")
        ax.set_xlabel("Node location (ISO 3166 alpha-3)")
        ax.set_ylim(0, max(histogram.values(), default=0) + 1)
        return _save(fig, path)


def vendor_bars(models: Mapping[str, int], devices: Mapping[str, int], path) -> Path:
    """Stacked bars: distinct models, plus the extra devices sharing those models."""
    vendors = sorted(set(models) | set(devices), key=lambda v: (-devices.get(v, 0), v))
    base = [models.get(v, 0) for v in vendors]
    extra = [devices.get(v, 0) - models.get(v, 0) for v in vendors]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        ax.bar(vendors, base, color=DARK, edgecolor="black", linewidth=0.5, label="Models")
        ax.bar(vendors, extra, bottom=base, color=LIGHT, edgecolor="0.5", linewidth=0.5, label="Devices")
        ax.set_ylabel("# devices")
        ax.tick_params(axis="x", rotation=45)
        ax.legend(frameon=False, ncol=2, loc="upper right")
        return _save(fig, path)


def android_shares(shares: Dict, path) -> Path:
    versions = sorted(shares, key=int)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.2, 2.4))
        bars = ax.bar([f"Android {v}" for v in versions], [shares[v] for v in versions], color=DARK)
        ax.bar_label(bars, labels=[f"{shares[v]}%" for v in versions], padding=1, fontsize=7)
        ax.set_ylabel("Share of devices [%]")
        return _save(fig, path)
