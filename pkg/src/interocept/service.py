"""HTTP/WS bridge between the simulation loop and human operators.

One asyncio task owns the world and advances it; request handlers only
enqueue commands and read the latest published frame, so no lock guards the
world state. Slow stream consumers skip to the newest frame; the on-disk log
(when configured) gets every frame regardless.
"""

from __future__ import annotations

import asyncio
import json
import math
import socket
import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .errors import BindFailure, InteroceptError, MalformedCommand
from .shared_control import DissonanceRecord, dissonance_field, field_to_json_dict
from .sim import Scenario, Simulation
from .tracking import visit_heatmap
from .velocity_replay import load_model, project_2d

_COMMAND_KINDS = {
    "velocity_increment", "pause", "resume", "semantic_feedback",
    "set_threshold", "set_task_state",
}

# wire command kind -> harness event kind
_EVENT_KIND = {
    "velocity_increment": "increment",
    "semantic_feedback": "feedback",
    "set_threshold": "set_threshold",
    "set_task_state": "set_task_state",
}


class ControlService:
    """Owns one Simulation and its tick loop; starts paused."""

    def __init__(self, scenario: Scenario, time_scale: float = 1.0,
                 model_path: str | None = None, log_path: str | None = None,
                 ui_dir: str | None = None):
        if time_scale < 0:
            raise ValueError("time_scale must be >= 0 (0 means free-run)")
        self.scenario = scenario
        self.sim = Simulation(scenario)
        self.paused = True
        self.time_scale = time_scale
        self.model_path = model_path
        self._log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
        self._frame_published = asyncio.Condition()
        self._stopping = False
        self._loop_task: asyncio.Task | None = None
        if self._log_fh:
            self._write_log_line(self.sim.frames[0])
        self.app = _build_app(self, ui_dir)

    # -- lifecycle -------------------------------------------------------------

    async def start(self) -> None:
        self._loop_task = asyncio.get_running_loop().create_task(self._run_loop())

    async def stop(self) -> None:
        self._stopping = True
        if self._loop_task is not None:
            self._loop_task.cancel()
            try:
                await self._loop_task
            except asyncio.CancelledError:
                pass
        if self._log_fh:
            self._log_fh.close()
            self._log_fh = None

    async def _run_loop(self) -> None:
        while not self._stopping:
            if self.paused or self.sim.phase == "Done":
                await asyncio.sleep(0.01)
                continue
            frame = self.sim.tick()
            if self._log_fh:
                self._write_log_line(frame)
            async with self._frame_published:
                self._frame_published.notify_all()
            # wall-clock pacing: dt * time_scale seconds per tick; zero means
            # free-run (yield to the event loop only)
            await asyncio.sleep(self.sim.scenario.dt_s * self.time_scale)

    def _write_log_line(self, frame: dict) -> None:
        self._log_fh.write(json.dumps(frame, separators=(",", ":")) + "\n")
        self._log_fh.flush()

    # -- read model --------------------------------------------------------------

    def state_payload(self) -> dict:
        frame = self.sim.frames[-1]
        return {
            "paused": self.paused,
            "seq": frame["tick"],
            "server_ts": time.time(),
            "frame": frame,
        }

    def scenario_payload(self) -> dict:
        sc = self.scenario
        return {
            "map": sc.grid.to_json_dict(),
            "hypergraph": self.sim.hypergraph.to_json_dict(),
            "robots": [
                {"id": r.id, "start": list(r.start), "goal": list(r.goal),
                 "cruise_speed": r.cruise_speed}
                for r in sc.robots
            ],
            "workspace_cells": [list(c) for c in sc.workspace_cells],
            "pathway_cells": [list(c) for c in sc.pathway_cells],
            "dwell_s": sc.dwell_s,
            "dt_s": sc.dt_s,
            "drive": {
                "wheel_radius": sc.drive.wheel_radius,
                "axle_length": sc.drive.axle_length,
                "v_max": sc.drive.v_max,
                "w_max": sc.drive.w_max,
            },
            "thresholds": {
                "proximity_m": self.sim.proximity_m,
                "dv_per_event": sc.thresholds.dv_per_event,
                "dw_per_event": sc.thresholds.dw_per_event,
            },
        }

    # -- commands ---------------------------------------------------------------

    def handle_command(self, cmd: dict) -> dict:
        """Validate, clamp on ingest, enqueue; returns the acknowledgment."""
        if not isinstance(cmd, dict) or "kind" not in cmd:
            raise MalformedCommand("command needs a kind")
        kind = cmd["kind"]
        if kind not in _COMMAND_KINDS:
            raise MalformedCommand(f"unknown command kind {kind!r}")
        ack = {"accepted": True, "received_tick": self.sim.tick_count}
        if kind == "pause":
            self.paused = True
            return ack
        if kind == "resume":
            self.paused = False
            return ack

        event = {"tick": self.sim.tick_count + 1, "kind": _EVENT_KIND[kind]}
        if kind == "velocity_increment":
            thr = self.scenario.thresholds
            try:
                dv = float(cmd.get("dv", 0.0))
                dw = float(cmd.get("dw", 0.0))
            except (TypeError, ValueError) as exc:
                raise MalformedCommand(f"dv/dw must be numbers: {exc}") from None
            if not (math.isfinite(dv) and math.isfinite(dw)):
                raise MalformedCommand("dv/dw must be finite")
            clamped_dv = min(thr.dv_per_event, max(-thr.dv_per_event, dv))
            clamped_dw = min(thr.dw_per_event, max(-thr.dw_per_event, dw))
            if (clamped_dv, clamped_dw) != (dv, dw):
                ack["note"] = "clamped"
            event.update(robot_id=cmd.get("robot_id"), dv=clamped_dv, dw=clamped_dw)
        elif kind == "semantic_feedback":
            event.update(text=cmd.get("text"),
                         anchors=[list(c) for c in cmd.get("anchor_cells", [])])
        elif kind == "set_threshold":
            event.update(meters=cmd.get("meters"))
        elif kind == "set_task_state":
            for key in ("availability", "occupancy"):
                if key in cmd:
                    event[key] = cmd[key]
        self.sim.enqueue(event)  # raises MalformedCommand / UnknownRobot
        return ack

    # -- artifacts ----------------------------------------------------------------

    def artifact_heatmap(self) -> dict:
        frames = self._data_frames()
        poses = [(f["tick"], r["id"], r["pose"]["x"], r["pose"]["y"])
                 for f in frames for r in f["robots"]]
        return visit_heatmap(poses, self.scenario.grid).to_json_dict()

    def artifact_dissonance(self, time_bins: int = 24, station_bins: int = 16) -> dict:
        frames = self._data_frames()
        records = [
            DissonanceRecord(d["tick"], d["intensity"], d["dissonance"], d["station_m"])
            for f in frames for d in f["dissonance"]
        ]
        return field_to_json_dict(dissonance_field(records, time_bins, station_bins))

    def artifact_embeddings(self) -> dict:
        if not self.model_path:
            raise HTTPException(404, "NoData: no embedding model configured")
        _, _, store, _ = load_model(self.model_path)
        points = []
        contexts = []
        for ctx in store.contexts():
            for emb in store.by_context[ctx]:
                points.append(emb)
                contexts.append(ctx)
        if len(points) < 2:
            raise HTTPException(404, "NoData: store holds fewer than 2 embeddings")
        flat = project_2d(points)
        return {"points": [[x, y] for x, y in flat], "contexts": contexts}

    def artifact_log(self) -> str:
        return "".join(json.dumps(f, separators=(",", ":")) + "\n"
                       for f in self.sim.frames)

    def _data_frames(self) -> list[dict]:
        if len(self.sim.frames) <= 1:
            raise HTTPException(404, "NoData: no completed tick yet")
        return self.sim.frames


def _build_app(service: ControlService, ui_dir: str | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_app):
        await service.start()
        yield
        await service.stop()

    app = FastAPI(title="interocept control service", lifespan=lifespan)

    if ui_dir:
        # Same-origin hosting for the operator console; the API stays as-is.
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.get("/state")
    def get_state():
        return service.state_payload()

    @app.get("/scenario")
    def get_scenario():
        return service.scenario_payload()

    @app.post("/command")
    async def post_command(cmd: dict):
        try:
            return service.handle_command(cmd)
        except InteroceptError as exc:
            return _reject(exc)

    @app.get("/artifact/heatmap")
    def get_heatmap():
        return service.artifact_heatmap()

    @app.get("/artifact/dissonance")
    def get_dissonance(time_bins: int = 24, station_bins: int = 16):
        return service.artifact_dissonance(time_bins, station_bins)

    @app.get("/artifact/embeddings")
    def get_embeddings():
        return service.artifact_embeddings()

    @app.get("/artifact/log")
    def get_log():
        return PlainTextResponse(service.artifact_log(),
                                 media_type="application/jsonl")

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        last_seq = -1
        try:
            while True:
                async with service._frame_published:
                    await service._frame_published.wait()
                payload = service.state_payload()
                if payload["seq"] > last_seq:  # latest-wins: skipped frames are fine
                    last_seq = payload["seq"]
                    await ws.send_json(payload)
        except WebSocketDisconnect:
            pass

    return app


def _reject(exc: Exception) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"accepted": False, "reason": f"{type(exc).__name__}: {exc}"})


def check_bind(host: str, port: int) -> None:
    """Fail fast (BindFailure) when the address is already taken."""
    try:
        probe = socket.create_server((host, port))
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
    probe.close()


def serve(scenario: Scenario, host: str = "127.0.0.1", port: int = 8732,
          time_scale: float = 1.0, model_path: str | None = None,
          log_path: str | None = None, ui_dir: str | None = None) -> ControlService:
    """Construct the service and verify the address; caller runs uvicorn."""
    check_bind(host, port)
    return ControlService(scenario, time_scale, model_path, log_path, ui_dir)
