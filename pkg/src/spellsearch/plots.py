"""Figure rendering for stats, reports, sweeps, and latency runs.

All functions write a PNG next to the delimited output and return the path.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .corpus import EDIT_TYPES
from .evaluation import ExperimentReport, SweepPoint
from .stats import StatsModel


def error_type_pie(stats: StatsModel, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    labels = [t.value for t in EDIT_TYPES]
    ax.pie(stats.error_types, labels=labels, autopct="%1.1f%%", startangle=90)
    ax.set_title(f"Edit type distribution ({stats.dataset_id})")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def substitution_heatmap(stats: StatsModel, path: Path) -> Path:
    chars = list(stats.alphabet.chars)
    fig, ax = plt.subplots(figsize=(9, 8))
    im = ax.imshow(stats.substitution_table, cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(chars)), chars, fontsize=6)
    ax.set_yticks(range(len(chars)), chars, fontsize=6)
    ax.set_xlabel("substituting key")
    ax.set_ylabel("original key")
    ax.set_title(f"Substitution probabilities ({stats.dataset_id})")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def position_histograms(stats: StatsModel, path: Path) -> Path:
    fig, axes = plt.subplots(1, len(EDIT_TYPES), figsize=(16, 3), sharey=True)
    edges = stats.bin_edges
    centers = (edges[:-1] + edges[1:]) / 2
    for ax, (i, t) in zip(axes, enumerate(EDIT_TYPES)):
        ax.bar(centers, stats.position[i], width=0.9 / stats.bins)
        ax.set_title(t.value, fontsize=9)
        ax.set_xlabel("relative position")
    axes[0].set_ylabel("probability")
    fig.suptitle(f"Edit position distribution ({stats.dataset_id})")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def accuracy_bars(report: ExperimentReport, path: Path) -> Path:
    by_strategy: dict[str, list[float]] = {}
    order: list[str] = []
    for r in report.rows:
        if r.strategy not in order:
            order.append(r.strategy)
        if r.accuracy is not None:
            by_strategy.setdefault(r.strategy, []).append(r.accuracy)
    means = [100 * np.mean(by_strategy.get(s, [0.0])) for s in order]
    spreads = [
        100 * (np.std(by_strategy[s]) if len(by_strategy.get(s, [])) > 1 else 0.0)
        for s in order
    ]
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(order)), 4))
    ax.bar(range(len(order)), means, yerr=spreads, capsize=4)
    ax.set_xticks(range(len(order)), order, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("accuracy %")
    ax.set_title("Training strategy comparison")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def sweep_curve(points: Sequence[SweepPoint], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [p.n_per_class for p in points]
    ax.plot(ns, [100 * p.mean_accuracy for p in points], marker="o")
    for p in points:
        for acc in p.per_seed:
            ax.plot(p.n_per_class, 100 * acc, marker=".", color="gray", alpha=0.5)
    ax.set_xscale("log", base=2)
    ax.set_xticks(ns, [str(n) for n in ns])
    ax.set_xlabel("synthetic samples per class")
    ax.set_ylabel("accuracy %")
    ax.set_title("Sample-size saturation")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def fusion_surface(
    surface: Sequence[tuple[tuple[float, ...], float]],
    dataset_ids: Sequence[str],
    path: Path,
) -> Path:
    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(surface)), 4))
    labels = [
        "/".join(f"{w:g}" for w in point) for point, _ in surface
    ]
    accs = [100 * acc for _, acc in surface]
    ax.bar(range(len(surface)), accs)
    ax.set_xticks(range(len(surface)), labels, rotation=90, fontsize=7)
    ax.set_xlabel("mixture weights " + "/".join(dataset_ids))
    ax.set_ylabel("accuracy %")
    ax.set_title("Dataset fusion grid")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def latency_histogram(latencies_ms: Sequence[float], path: Path) -> Path:
    arr = np.asarray(latencies_ms)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(arr, bins=50)
    for q, style in ((50, "--"), (99, ":")):
        v = np.percentile(arr, q)
        ax.axvline(v, linestyle=style, color="red")
        ax.text(v, ax.get_ylim()[1] * 0.9, f"p{q}={v:.1f}ms", fontsize=8)
    ax.set_xlabel("end-to-end latency (ms)")
    ax.set_ylabel("requests")
    ax.set_title("Correction API latency")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
