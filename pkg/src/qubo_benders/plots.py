"""Per-metric SVG plots over benchmark aggregates, error bars from std devs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = ["plot_metric", "LOG_METRICS"]

LOG_METRICS = {"solve_time", "total_time"}
AXIS_LABELS = {
    "success_rate": "success rate",
    "objective": "objective (selected runs)",
    "iterations": "iterations",
    "final_qubo_size": "final QUBO size (bits)",
    "solve_time": "solve time [s]",
    "total_time": "total time [s]",
}


def plot_metric(rows: list[dict], metric: str, path: str) -> None:
    """One figure: metric vs bus count, one error-bar series per config.

    Cells without any successful run carry null aggregates and are left out
    of mean plots; success_rate itself always plots, zeros included.  Time
    metrics use a log axis when all values are positive.
    """
    configs = []
    for row in rows:
        if row["config"] not in configs:
            configs.append(row["config"])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    all_y = []
    for config in configs:
        xs, ys, errs = [], [], []
        for row in rows:
            if row["config"] != config:
                continue
            if metric == "success_rate":
                y, err = row["success_rate"], None
            else:
                y, err = row[f"{metric}_mean"], row[f"{metric}_std"]
            if y is None:
                continue
            xs.append(row["buses"])
            ys.append(y)
            errs.append(0.0 if err is None else err)
        if not xs:
            continue
        yerr = None if metric == "success_rate" else errs
        ax.errorbar(xs, ys, yerr=yerr, marker="o", capsize=3, label=config)
        all_y.extend(ys)

    if metric in LOG_METRICS and all_y and min(all_y) > 0:
        ax.set_yscale("log")
    ax.set_xlabel("buses")
    ax.set_ylabel(AXIS_LABELS.get(metric, metric))
    if configs:
        ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
