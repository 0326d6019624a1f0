"""Command-line entry points: plan, simulate, replay-log, velrep, serve, report."""

from __future__ import annotations

import json
import os
import sys

import click

from .errors import InteroceptError
from .grid_map import load_map
from .planner import astar_with_stats
from .report import render_report
from .sim import (
    Scenario, check_log_invariants, default_scenario, load_scenario,
    read_run_log, simulate as run_simulation, write_run_log,
)
from .task_hypergraph import Availability, OccupancyFlag, load_hypergraph
from .velocity_replay import (
    DecoderHyper, Embedding, EmbeddingStore, EncoderHyper, StoreMeta,
    gaussian_smooth, gru_encode, load_model, make_pairs, replay, save_model,
    segment, train_decoder, train_encoder,
)
from .tracking import VelocityProfile


def _parse_cell(text: str) -> tuple[int, int]:
    try:
        c, r = text.split(",")
        return int(c), int(r)
    except ValueError:
        raise click.BadParameter(f"expected c,r integers, got {text!r}")


def _load_scenario_opt(path: str | None) -> Scenario:
    return load_scenario(path) if path else default_scenario()


@click.group()
def main():
    """Shared-control delivery stack: planning, simulation, velocity replay."""


@main.command("plan")
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--hypergraph", "hg_path", required=True, type=click.Path(exists=True))
@click.option("--start", required=True, help="start cell as c,r")
@click.option("--goal", required=True, help="goal cell as c,r")
@click.option("--state", default=None, help="task state as availability,occupancy")
@click.option("--out", "out_path", default=None, type=click.Path())
def plan_cmd(map_path, hg_path, start, goal, state, out_path):
    """Find a minimum-cost admissible path and report node expansions."""
    grid = load_map(map_path)
    hg = load_hypergraph(hg_path)
    if state:
        parts = state.split(",")
        if len(parts) != 2:
            raise click.BadParameter("expected availability,occupancy")
        try:
            hg.set_task_state(availability=Availability(parts[0]),
                              occupancy=OccupancyFlag(parts[1]))
        except ValueError as exc:
            raise click.BadParameter(str(exc))
    try:
        path, expansions = astar_with_stats(grid, hg, _parse_cell(start),
                                            _parse_cell(goal))
    except InteroceptError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    doc = path.to_json_dict()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        click.echo(f"path written to {out_path}")
    else:
        click.echo(json.dumps(doc, indent=2))
    click.echo(f"expansions: {expansions}")


@main.command("simulate")
@click.option("--scenario", "scenario_path", default=None, type=click.Path(exists=True))
@click.option("--inputs", "inputs_path", default=None, type=click.Path(exists=True),
              help="JSON list of operator events")
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--max-ticks", default=3000, show_default=True)
def simulate_cmd(scenario_path, inputs_path, log_path, max_ticks):
    """Run the delivery scenario to completion and write the frame log."""
    sc = _load_scenario_opt(scenario_path)
    trace = []
    if inputs_path:
        with open(inputs_path, encoding="utf-8") as fh:
            trace = json.load(fh)
    frames = run_simulation(sc, trace, max_ticks=max_ticks)
    write_run_log(frames, log_path)
    click.echo(f"{len(frames)} frames, final phase {frames[-1]['phase']} -> {log_path}")


@main.command("replay-log")
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--check-invariants", is_flag=True)
@click.option("--scenario", "scenario_path", default=None, type=click.Path(exists=True))
def replay_log_cmd(log_path, check_invariants, scenario_path):
    """Summarize a recorded run; optionally verify its safety invariants."""
    frames = read_run_log(log_path)
    alerts = sum(len(f.get("alerts", [])) for f in frames)
    click.echo(f"{len(frames)} frames, {frames[-1]['t_s']:.2f} s, "
               f"final phase {frames[-1]['phase']}, {alerts} alerts")
    if check_invariants:
        violations = check_log_invariants(frames, _load_scenario_opt(scenario_path))
        if violations:
            for v in violations:
                click.echo(f"VIOLATION: {v}")
            sys.exit(1)
        click.echo("invariants: ok")


@main.group()
def velrep():
    """Train and query the velocity-replay model."""


def _fused_profiles(frames) -> dict[str, VelocityProfile]:
    """Per-robot fused linear-speed traces from a run log."""
    dt = frames[1]["t_s"] - frames[0]["t_s"]
    rate = 1.0 / dt
    series: dict[str, list[float]] = {}
    for f in frames:
        for r in f["robots"]:
            series.setdefault(r["id"], []).append(abs(r["fused"]["v"]))
    return {rid: VelocityProfile(rate, vals) for rid, vals in series.items()}


@velrep.command("train")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--window", default=20, show_default=True)
@click.option("--stride", default=10, show_default=True)
@click.option("--epochs", default=150, show_default=True)
@click.option("--decoder-epochs", default=3000, show_default=True)
@click.option("--hidden", default=16, show_default=True)
@click.option("--embedding", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
def velrep_train(log_path, out_path, window, stride, epochs, decoder_epochs,
                 hidden, embedding, seed):
    """Fit encoder and decoder on a run's fused speed traces."""
    frames = read_run_log(log_path)
    if len(frames) < 2:
        raise click.ClickException("log holds no completed tick")
    profiles = _fused_profiles(frames)

    all_windows = []
    all_pairs = []
    for rid, profile in sorted(profiles.items()):
        try:
            wins = [gaussian_smooth(w, 1.0)
                    for w in segment(profile, window, stride, rid)]
        except InteroceptError as exc:
            raise click.ClickException(f"robot {rid}: {exc}")
        all_windows.extend(wins)
        try:
            # pairs stay within one robot's trace so "consecutive" means in time
            all_pairs.extend(make_pairs(wins, 2, min(3, len(wins) - 1), seed=seed))
        except InteroceptError:
            pass  # too few windows for pairs; still embed them for the store
    if not all_pairs:
        raise click.ClickException("not enough windows to build training pairs")

    trained = train_encoder(all_pairs, EncoderHyper(
        lr=0.3, epochs=epochs, margin=1.0, seed=seed,
        hidden=hidden, embedding=embedding))
    click.echo(f"encoder: {len(all_pairs)} pairs, "
               f"loss {trained.loss_curve[0]:.4f} -> {trained.loss_curve[-1]:.4f}")

    store = EmbeddingStore(StoreMeta(
        window=window, stride=stride,
        sample_rate_hz=next(iter(profiles.values())).sample_rate_hz,
        dimension=embedding))
    vectors = []
    for win in all_windows:
        vec = gru_encode(trained.params, win)
        vectors.append(vec)
        store.add(Embedding(tuple(vec), win.context_key, win.start_index))

    decoder, mse = train_decoder(vectors, all_windows,
                                 DecoderHyper(lr=0.5, epochs=decoder_epochs,
                                              seed=seed, hidden=32))
    click.echo(f"decoder: reconstruction MSE {mse:.6f}")

    save_model(out_path, trained.params, decoder, store, hyper={
        "window": window, "stride": stride, "encoder_epochs": epochs,
        "decoder_epochs": decoder_epochs, "seed": seed,
    })
    click.echo(f"model -> {out_path}")


@velrep.command("replay")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--context", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def velrep_replay(model_path, context, out_path):
    """Reconstruct a context's speed profile from its stored embeddings."""
    _, decoder, store, _ = load_model(model_path)
    try:
        profile = replay(store, decoder, context)
    except InteroceptError as exc:
        raise click.ClickException(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({
            "context": context,
            "sample_rate_hz": profile.sample_rate_hz,
            "samples": list(profile.samples),
        }, fh)
    click.echo(f"{len(profile.samples)} samples, {profile.duration_s:.2f} s "
               f"-> {out_path}")


@main.command("serve")
@click.option("--scenario", "scenario_path", default=None, type=click.Path(exists=True))
@click.option("--bind", default="127.0.0.1:8732", show_default=True,
              help="host:port (INTEROCEPT_BIND overrides)")
@click.option("--time-scale", default=1.0, show_default=True,
              help="wall seconds per sim second; 0 runs unpaced")
@click.option("--model", "model_path", default=None, type=click.Path(exists=True))
@click.option("--log", "log_path", default=None, type=click.Path())
@click.option("--ui", "ui_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="directory with the operator console; mounted at /ui")
def serve_cmd(scenario_path, bind, time_scale, model_path, log_path, ui_dir):
    """Host the control service (starts paused; resume via POST /command)."""
    import uvicorn

    from .service import serve as build_service

    bind = os.environ.get("INTEROCEPT_BIND", bind)
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.BadParameter(f"expected host:port, got {bind!r}")
    sc = _load_scenario_opt(scenario_path)
    try:
        svc = build_service(sc, host, int(port_text), time_scale,
                            model_path, log_path, ui_dir)
    except InteroceptError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"serving on {host}:{port_text} (paused)")
    if ui_dir:
        click.echo(f"console at http://{host}:{port_text}/ui/")
    uvicorn.run(svc.app, host=host, port=int(port_text), log_level="warning")


@main.command("report")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--scenario", "scenario_path", default=None, type=click.Path(exists=True))
@click.option("--model", "model_path", default=None, type=click.Path(exists=True))
def report_cmd(log_path, out_dir, scenario_path, model_path):
    """Render run figures (PNG) with CSV twins into a directory."""
    frames = read_run_log(log_path)
    sc = _load_scenario_opt(scenario_path)
    try:
        written = render_report(frames, sc.grid, out_dir, model_path=model_path)
    except InteroceptError as exc:
        raise click.ClickException(str(exc))
    for p in written:
        click.echo(p)


if __name__ == "__main__":
    main()
