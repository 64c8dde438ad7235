"""Figure rendering for emitted report tables (matplotlib, Agg backend)."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_rows(rows, kind, out_path):
    """Render one figure for a report-kind's rows; returns True if drawn."""
    if not rows:
        return False
    if kind == "cluster_hist":
        return _render_cluster_hist(rows, out_path)
    windows = {r["window"] for r in rows}
    if len(windows) > 1:
        return _render_window_sweep(rows, kind, out_path)
    return _render_scale_curves(rows, kind, out_path)


def _finish(fig, out_path):
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return True


def _render_scale_curves(rows, kind, out_path):
    by_line = defaultdict(list)
    for r in rows:
        by_line[(r["k"], r["metric"])].append((r["scale"], r["value"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for (k, metric), points in sorted(by_line.items()):
        points.sort()
        style = "--" if "control" in metric or "same_accent" in metric else "-"
        ax.plot([p[0] for p in points], [p[1] for p in points], style,
                marker="o", label=f"k={k} {metric}")
    ax.set_xlabel("scale factor")
    ax.set_ylabel("value")
    ax.set_title(kind)
    ax.legend(fontsize=7)
    return _finish(fig, out_path)


def _render_window_sweep(rows, kind, out_path):
    by_line = defaultdict(list)
    for r in rows:
        by_line[(r["k"], r["metric"], r["scale"])].append(
            (r["window"], r["value"])
        )
    fig, ax = plt.subplots(figsize=(6, 4))
    for (k, metric, scale), points in sorted(by_line.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], marker="o",
                label=f"k={k} {metric} scale={scale:g}")
    ax.set_xlabel("moving-average window")
    ax.set_ylabel("value")
    ax.set_title(f"{kind} (window sweep)")
    ax.legend(fontsize=6)
    return _finish(fig, out_path)


def _render_cluster_hist(rows, out_path):
    by_k = defaultdict(list)
    for r in rows:
        if r["metric"].startswith("freq_rank_") or r["metric"] == "sorted_cluster_freq":
            rank = (int(r["metric"].rsplit("_", 1)[1])
                    if r["metric"].startswith("freq_rank_") else int(r["scale"]))
            by_k[r["k"]].append((rank, r["value"]))
    if not by_k:
        return False
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, points in sorted(by_k.items()):
        points.sort()
        ax.plot([p[0] + 1 for p in points], [p[1] for p in points],
                label=f"k={k}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("cluster rank")
    ax.set_ylabel("normalized frequency")
    ax.set_title("sorted cluster-frequency distribution")
    ax.legend(fontsize=8)
    return _finish(fig, out_path)
