"""Render a recorded run into figures plus machine-readable CSV tables.

Every figure gets a CSV sibling carrying the same numbers, so downstream
tooling never has to scrape pixels.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import NoData
from .grid_map import GridMap
from .shared_control import DissonanceRecord, dissonance_field
from .tracking import visit_heatmap
from .velocity_replay import load_model, project_2d


def _records(frames) -> list[DissonanceRecord]:
    return [DissonanceRecord(d["tick"], d["intensity"], d["dissonance"], d["station_m"])
            for f in frames for d in f.get("dissonance", [])]


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def render_heatmap(frames, grid: GridMap, out_dir: str) -> list[str]:
    poses = [(f["tick"], r["id"], r["pose"]["x"], r["pose"]["y"])
             for f in frames for r in f["robots"]]
    heat = visit_heatmap(poses, grid)
    counts = heat.counts

    fig, ax = plt.subplots(figsize=(7, 4))
    im = ax.imshow(counts, origin="lower", cmap="viridis", aspect="equal")
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.set_title("cell visits")
    fig.colorbar(im, ax=ax, label="frames present")
    png = os.path.join(out_dir, "heatmap.png")
    fig.savefig(png, dpi=120, bbox_inches="tight")
    plt.close(fig)

    csv_path = os.path.join(out_dir, "heatmap.csv")
    _write_csv(csv_path, ["row"] + [f"col_{c}" for c in range(grid.width)],
               [[r] + list(row) for r, row in enumerate(counts)])
    return [png, csv_path]


def render_dissonance(frames, out_dir: str, time_bins: int = 24,
                      station_bins: int = 16) -> list[str]:
    records = _records(frames)
    field = dissonance_field(records, time_bins, station_bins)

    fig, ax = plt.subplots(figsize=(7, 4))
    im = ax.imshow(field, origin="lower", cmap="magma", aspect="auto")
    ax.set_xlabel("station bin")
    ax.set_ylabel("time bin")
    ax.set_title("dissonance intensity")
    fig.colorbar(im, ax=ax, label="mean dissonance")
    png = os.path.join(out_dir, "dissonance.png")
    fig.savefig(png, dpi=120, bbox_inches="tight")
    plt.close(fig)

    csv_path = os.path.join(out_dir, "dissonance.csv")
    _write_csv(csv_path, ["time_bin"] + [f"station_{s}" for s in range(station_bins)],
               [[t] + list(row) for t, row in enumerate(field)])
    return [png, csv_path]


def render_commands(frames, out_dir: str) -> list[str]:
    """Auto vs fused linear speed per robot over the run."""
    ids = [r["id"] for r in frames[0]["robots"]]
    series = {rid: {"t": [], "auto": [], "fused": []} for rid in ids}
    for f in frames:
        for r in f["robots"]:
            s = series[r["id"]]
            s["t"].append(f["t_s"])
            s["auto"].append(r["auto"]["v"])
            s["fused"].append(r["fused"]["v"])

    fig, axes = plt.subplots(len(ids), 1, figsize=(8, 2.4 * len(ids)),
                             sharex=True, squeeze=False)
    for ax, rid in zip(axes.flat, ids):
        s = series[rid]
        ax.plot(s["t"], s["auto"], label="auto", linewidth=1.0)
        ax.plot(s["t"], s["fused"], label="fused", linewidth=1.0, linestyle="--")
        ax.set_ylabel(f"{rid} v (m/s)")
        ax.legend(loc="upper right", fontsize="small")
    axes.flat[-1].set_xlabel("time (s)")
    fig.suptitle("commanded linear speed")
    png = os.path.join(out_dir, "commands.png")
    fig.savefig(png, dpi=120, bbox_inches="tight")
    plt.close(fig)

    csv_path = os.path.join(out_dir, "commands.csv")
    rows = [[f["tick"], f["t_s"], r["id"], r["auto"]["v"], r["auto"]["w"],
             r["fused"]["v"], r["fused"]["w"]]
            for f in frames for r in f["robots"]]
    _write_csv(csv_path,
               ["tick", "t_s", "robot", "auto_v", "auto_w", "fused_v", "fused_w"],
               rows)
    return [png, csv_path]


def render_embeddings(model_path: str, out_dir: str) -> list[str]:
    _, _, store, _ = load_model(model_path)
    embeddings = [e for ctx in store.contexts() for e in store.by_context[ctx]]
    if len(embeddings) < 2:
        raise NoData("embedding store holds fewer than 2 vectors")
    flat = project_2d(embeddings)
    contexts = [e.context_key for e in embeddings]

    fig, ax = plt.subplots(figsize=(5, 5))
    for ctx in sorted(set(contexts)):
        xs = [p[0] for p, c in zip(flat, contexts) if c == ctx]
        ys = [p[1] for p, c in zip(flat, contexts) if c == ctx]
        ax.scatter(xs, ys, label=ctx, s=18)
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    ax.set_title("window embeddings")
    ax.legend(fontsize="small")
    png = os.path.join(out_dir, "embeddings.png")
    fig.savefig(png, dpi=120, bbox_inches="tight")
    plt.close(fig)

    csv_path = os.path.join(out_dir, "embeddings.csv")
    _write_csv(csv_path, ["context", "order_index", "x", "y"],
               [[e.context_key, e.order_index, p[0], p[1]]
                for e, p in zip(embeddings, flat)])
    return [png, csv_path]


def render_report(frames, grid: GridMap, out_dir: str,
                  model_path: str | None = None) -> list[str]:
    """Write the full artifact set; returns the created file paths."""
    if len(frames) < 2:
        raise NoData("log holds no completed tick")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    written += render_heatmap(frames, grid, out_dir)
    written += render_dissonance(frames, out_dir)
    written += render_commands(frames, out_dir)
    if model_path:
        written += render_embeddings(model_path, out_dir)

    summary = {
        "frames": len(frames),
        "final_phase": frames[-1]["phase"],
        "duration_s": frames[-1]["t_s"],
        "alerts": sum(len(f.get("alerts", [])) for f in frames),
        "peak_dissonance": max(
            (d["dissonance"] for f in frames for d in f.get("dissonance", [])),
            default=0.0),
        "artifacts": [os.path.basename(p) for p in written],
    }
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    written.append(summary_path)
    return written
