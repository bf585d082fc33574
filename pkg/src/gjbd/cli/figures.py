"""Figure rendering for bench reports: PNGs next to the CSV output."""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bench import summarize


def render_bench_figures(experiment: str, rows, csv_path) -> list[str]:
    """Write the figures appropriate for an experiment; returns the paths."""
    stem, _ = os.path.splitext(str(csv_path))
    if experiment in ("table2-p1", "table2-p2"):
        return _success_curve(rows, stem)
    if experiment == "fig12-sweep":
        return _pi_boxplots(rows, stem)
    if experiment == "scaling-p3":
        return _time_vs_count(rows, stem)
    if experiment == "scaling-p4":
        return _time_vs_size(rows, stem)
    return []


def _success_curve(rows, stem):
    summary = summarize(rows)
    snrs = [c["snr_db"] for c in summary]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(snrs, [c["success_merge"] for c in summary], "o-",
            label="merge-consistent")
    ax.plot(snrs, [c["success_strict"] for c in summary], "s--",
            label="strict")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("successful runs (%)")
    ax.set_ylim(0, 105)
    ax.grid(True, alpha=0.3)
    ax.legend()
    ax.set_title(f"partition recovery, tau=({summary[0]['partition']})")
    path = f"{stem}_success.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]


def _pi_boxplots(rows, stem):
    paths = []
    for partition in sorted({r.partition for r in rows}):
        sub = [r for r in rows if r.partition == partition]
        snrs = sorted({r.snr_db for r in sub})
        pre, post = [], []
        for snr in snrs:
            cell = [r for r in sub if r.snr_db == snr]
            pre.append([r.pi_pre for r in cell if np.isfinite(r.pi_pre)])
            post.append([r.pi for r in cell if np.isfinite(r.pi)])
        fig, ax = plt.subplots(figsize=(7, 4))
        pos = np.arange(len(snrs), dtype=float)
        width = 0.32
        b1 = ax.boxplot(pre, positions=pos - width / 2, widths=width * 0.9,
                        patch_artist=True)
        b2 = ax.boxplot(post, positions=pos + width / 2, widths=width * 0.9,
                        patch_artist=True)
        for box in b1["boxes"]:
            box.set_facecolor("#d9855b")
        for box in b2["boxes"]:
            box.set_facecolor("#5b8dd9")
        ax.set_yscale("log")
        ax.set_xticks(pos)
        ax.set_xticklabels([f"{s:g}" for s in snrs])
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("performance index (rad)")
        ax.grid(True, alpha=0.3, axis="y")
        ax.legend([b1["boxes"][0], b2["boxes"][0]],
                  ["before refinement", "after refinement"])
        ax.set_title(f"tau=({partition})")
        safe = partition.replace(",", "-")
        path = f"{stem}_pi_tau{safe}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(path)
    return paths


def _time_vs_count(rows, stem):
    summary = summarize(rows)
    counts = [c["p"] + 1 for c in summary]
    times = [c["mean_time_total_ms"] for c in summary]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(counts, times, "o-")
    ax.set_xlabel("number of matrices (p+1)")
    ax.set_ylabel("mean solve time (ms)")
    ax.grid(True, alpha=0.3)
    path = f"{stem}_time_vs_count.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]


def _time_vs_size(rows, stem):
    summary = summarize(rows)
    ns = np.array([c["n"] for c in summary], dtype=float)
    times = np.array([c["mean_time_total_ms"] for c in summary])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(ns, times, "o-")
    if len(ns) >= 2:
        slope = np.polyfit(np.log(ns), np.log(times), 1)[0]
        ax.set_title(f"fitted growth exponent {slope:.2f}")
    ax.set_xlabel("matrix order n")
    ax.set_ylabel("mean solve time (ms)")
    ax.grid(True, alpha=0.3, which="both")
    path = f"{stem}_time_vs_size.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]
