"""Figures rendered next to JSON reports (matplotlib, file output only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .search import SearchReport  # noqa: E402


def plot_search(report: SearchReport, space, path) -> None:
    """Estimate of every priced node against its VC dimension."""
    strong = {p for p, _ in report.strong_local_minima or []}
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [space.vc_dim(p) for p in report.costs]
    ys = [float(v) for v in report.costs.values()]
    ax.scatter(xs, ys, s=18, color="0.6", label="priced node")
    if strong:
        ax.scatter([space.vc_dim(p) for p in strong], [float(report.costs[p]) for p in strong],
                   s=60, facecolors="none", edgecolors="tab:green", label="strong local minimum")
    ax.scatter([space.vc_dim(report.selected)], [float(report.selected_value)], s=90, marker="*",
               color="tab:blue", label=f"selected {report.selected.encode()}")
    ax.set_xlabel("VC dimension (blocks)")
    ax.set_ylabel("estimated error")
    ax.set_xticks(sorted(set(xs)))
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_consistency(rows, path) -> None:
    """Share of runs reaching the target error, and mean excess error, per sample size."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [r.n for r in rows]
    ax.plot(ns, [float(r.error_is_target) for r in rows], "o-", label="L(selected) = L(target)")
    ax.plot(ns, [float(r.selected_is_target) for r in rows], "s--", label="selected = target")
    ax.set_xscale("log")
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("sample size N")
    ax.set_ylabel("fraction of runs")
    ax2 = ax.twinx()
    ax2.plot(ns, [float(r.mean_type_iii) for r in rows], "^:", color="tab:red", label="mean excess model error")
    ax2.set_ylabel("mean excess model error", color="tab:red")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], fontsize=8, loc="center right")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
