"""Matplotlib renderings of the report series, saved next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .generator import CAPACITY_LEVELS, HORIZON_LEVELS

__all__ = [
    "save_speed_demand_png",
    "save_production_inventory_png",
    "save_capacity_profile_png",
]


def save_speed_demand_png(series: list[dict], path: str | Path, title: str = "") -> Path:
    """Demand bars with the first line's processing time on a twin axis."""
    periods = [row["period"] for row in series]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(periods, [row["demand_total"] for row in series],
           color="steelblue", alpha=0.8, label="total demand")
    ax.set_xlabel("period")
    ax.set_ylabel("demand (units)")
    ax2 = ax.twinx()
    ax2.plot(periods, [row["proc_time_m1"] for row in series],
             "r-o", markersize=4, label="line-1 processing time")
    ax2.set_ylabel("unit processing time (min/unit)")
    ax2.set_ylim(45, 85)
    lines = ax.get_legend_handles_labels()[0] + ax2.get_legend_handles_labels()[0]
    labels = ax.get_legend_handles_labels()[1] + ax2.get_legend_handles_labels()[1]
    ax.legend(lines, labels, loc="upper right", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_production_inventory_png(
    series: list[dict], path: str | Path, title: str = ""
) -> Path:
    """Finished production bars with both inventory levels as lines."""
    periods = [row["period"] for row in series]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(periods, [row["production_total"] for row in series],
           color="coral", alpha=0.8, label="finished production")
    ax.plot(periods, [row["end_inventory_total"] for row in series],
            "g-o", markersize=4, label="end-item inventory")
    ax.plot(periods, [row["wip_total"] for row in series],
            "b--s", markersize=4, label="WIP inventory")
    ax.set_xlabel("period")
    ax.set_ylabel("units")
    ax.legend(loc="upper right", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_capacity_profile_png(profile: list[dict], path: str | Path) -> Path:
    """Mean line-1 processing time against capacity level, one line per horizon."""
    fig, ax = plt.subplots(figsize=(6, 4))
    x = range(len(CAPACITY_LEVELS))
    for horizon in HORIZON_LEVELS:
        rows = {row["capacity_level"]: row for row in profile
                if row["horizon_level"] == horizon}
        if not rows:
            continue
        ys = [rows[c]["v1_mean"] if c in rows else float("nan") for c in CAPACITY_LEVELS]
        periods = next(iter(rows.values()))["num_periods"]
        ax.plot(x, ys, marker="o", label=f"{periods} periods")
    ax.set_xticks(list(x))
    ax.set_xticklabels([f"{c}" for c in CAPACITY_LEVELS])
    ax.set_xlabel("capacity level")
    ax.set_ylabel("mean line-1 processing time (min/unit)")
    ax.legend(fontsize=8)
    ax.set_title("average line-1 processing time by capacity level")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
