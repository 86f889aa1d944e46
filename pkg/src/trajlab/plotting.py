"""Render figures from run outputs (loss curves, probe scenes, attention).

The delimited text files are the primary interface; these helpers turn
them into PNGs next to the originals for quick inspection.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .probe import read_plot_data
from .training import read_loss_curve


def plot_loss_curve(curve_path, out_png):
    curve = read_loss_curve(curve_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(len(curve)), curve, lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


_STYLE = {
    "observed": dict(color="black", lw=2.0, marker="o", ms=3),
    "future": dict(color="tab:green", lw=1.5, ls="--"),
    "pred": dict(color="tab:blue", lw=1.2, alpha=0.6),
    "neighbor_real": dict(color="gray", lw=1.2, marker=".", ms=3),
    "neighbor_manual": dict(color="tab:red", lw=1.8, marker="s", ms=3),
}


def _style_for(label: str) -> dict:
    for prefix, style in _STYLE.items():
        if label.startswith(prefix):
            return style
    return dict(color="tab:purple", lw=1.0)


def plot_probe_scene(plot_data_path, out_png):
    polylines = read_plot_data(plot_data_path)
    fig, ax = plt.subplots(figsize=(6, 6))
    seen = set()
    for label, points in polylines:
        pts = np.asarray(points)
        style = _style_for(label)
        group = label.split("_")[0] if not label.startswith("neighbor") else "_".join(label.split("_")[:2])
        kwargs = dict(style)
        if group not in seen:
            kwargs["label"] = group
            seen.add(group)
        ax.plot(pts[:, 0], pts[:, 1], **kwargs)
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_attention_wheel(probe_json_path, out_png):
    """Polar bar chart of per-sector normalized attention scores."""
    with open(probe_json_path, "r", encoding="utf-8") as f:
        result = json.load(f)
    attention = result.get("attention")
    if attention is None:
        raise ValueError("probe result carries no attention profile")
    scores = np.asarray(attention["normalized"])
    n = scores.size
    width = 2 * np.pi / n
    centers = (np.arange(n) + 0.5) * width
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="polar")
    ax.bar(centers, scores, width=width * 0.95, color="tab:blue", alpha=0.7, edgecolor="black")
    ax.set_xticks((np.arange(n) + 0.5) * width)
    ax.set_xticklabels([str(i + 1) for i in range(n)])
    ax.set_title("partition attention (normalized)")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def render_run(run_dir) -> list:
    """Render every recognized output in a run directory; returns PNG paths."""
    run_dir = Path(run_dir)
    written = []
    loss = run_dir / "loss_curve.txt"
    if loss.exists():
        out = run_dir / "loss_curve.png"
        plot_loss_curve(loss, out)
        written.append(out)
    plot_data = run_dir / "plot_data.txt"
    if plot_data.exists():
        out = run_dir / "probe_scene.png"
        plot_probe_scene(plot_data, out)
        written.append(out)
    probe_json = run_dir / "probe_result.json"
    if probe_json.exists():
        with open(probe_json, "r", encoding="utf-8") as f:
            if json.load(f).get("attention") is not None:
                out = run_dir / "attention_wheel.png"
                plot_attention_wheel(probe_json, out)
                written.append(out)
    return [str(p) for p in written]
