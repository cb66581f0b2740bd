"""Benchmark figures, rendered straight to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import RRE_THRESHOLD_DEG, RTE_THRESHOLD_M


def save_error_figure(report: dict, path) -> Path:
    """Scatter of per-scene pose errors against the success thresholds."""
    rows = report["scenes"]
    rte = np.array([r["rte_m"] for r in rows])
    rre = np.array([r["rre_deg"] for r in rows])
    ok = np.array([r["success"] for r in rows], dtype=bool)

    fig, ax = plt.subplots(figsize=(6, 4.5))
    floor_rte = max(rte.min() if rte.size else 1e-6, 1e-6)
    floor_rre = max(rre.min() if rre.size else 1e-6, 1e-6)
    ax.scatter(np.maximum(rte[ok], floor_rte), np.maximum(rre[ok], floor_rre),
               s=18, label=f"success ({ok.sum()})")
    if np.any(~ok):
        ax.scatter(np.maximum(rte[~ok], floor_rte), np.maximum(rre[~ok], floor_rre),
                   s=18, marker="x", color="crimson", label=f"failure ({(~ok).sum()})")
    ax.axvline(RTE_THRESHOLD_M, color="gray", ls="--", lw=0.8)
    ax.axhline(RRE_THRESHOLD_DEG, color="gray", ls="--", lw=0.8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("translation error [m]")
    ax.set_ylabel("rotation error [deg]")
    rate = report["summary"]["success_rate"]
    ax.set_title(f"registration errors (success rate {rate:.1%})")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_timing_figure(timings: list[dict], path) -> Path:
    """Box plot of wall time per pipeline stage across the battery."""
    by_stage: dict[str, list[float]] = {}
    for entry in timings:
        for stage, ms in entry["stage_ms"].items():
            by_stage.setdefault(stage, []).append(ms)

    fig, ax = plt.subplots(figsize=(7, 4))
    if by_stage:
        labels = list(by_stage.keys())
        ax.boxplot([by_stage[s] for s in labels], tick_labels=labels, showfliers=False)
        ax.set_ylabel("wall time [ms]")
        ax.set_title("per-stage timing")
        plt.setp(ax.get_xticklabels(), rotation=30, ha="right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
