"""Delivery-handover simulation loop.

Single thread of control owns all mutable world state. External events
(velocity increments, semantic feedback, task-state overrides) enter through
an ordered queue drained once per tick, so identical scenario + trace always
reproduces an identical frame log. Frames carry no wall-clock timestamps for
exactly that reason.
"""

from __future__ import annotations

import copy
import json
import math
from collections import deque
from dataclasses import dataclass, field

from ..errors import (
    InconsistentIds,
    InteroceptError,
    InvalidPhase,
    InvalidScenario,
    MalformedCommand,
    NoPath,
    RobotOffPath,
    UnknownRobot,
)
from ..grid_map import CellCoord
from ..planner import plan_astar
from ..semantics import (
    EncodeParams,
    EpisodicArchive,
    classify_attribute,
    encode_to_hypergraph,
    extract_triples,
)
from ..shared_control import (
    AutonomousCommand,
    FusedCommand,
    HumanIncrement,
    Limits,
    fuse,
    record_dissonance,
)
from ..task_hypergraph import Availability, OccupancyFlag
from ..tracking import cell_center, check_proximity
from .diff_drive import (
    RobotPose,
    from_wheel_speeds,
    integrate_unicycle,
    quantize_command,
    to_wheel_speeds,
    wrap_angle,
)
from .scenario import Scenario

PHASES = ("ADeliver", "AReverse", "BWait", "BEnter", "Handover", "BTransport", "Done")
_PHASE_INDEX = {name: i for i, name in enumerate(PHASES)}

_EVENT_KINDS = {"increment", "set_task_state", "feedback", "set_threshold"}

# Waypoint homing: pop targets inside the reach radius, drive when roughly
# aligned, steer proportionally otherwise.
_REACH_FRACTION = 0.3
_ALIGN_RAD = 0.5
_K_HEADING = 2.0
_OFF_PATH_FACTOR = 6.0  # waypoint farther than this many cells => lost


@dataclass
class RobotRuntime:
    spec_id: str
    cruise: float
    pose: RobotPose
    waypoints: list[CellCoord] = field(default_factory=list)
    committed: list[CellCoord] = field(default_factory=list)  # cells of current route
    station_m: float = 0.0


def _cell_of(pose: RobotPose, cell_size: float) -> CellCoord:
    return CellCoord(int(math.floor(pose.x / cell_size)), int(math.floor(pose.y / cell_size)))


def waypoint_command(rt: RobotRuntime, cell_size: float, w_max: float) -> tuple[float, float]:
    """Quantized (v, w) homing on the next waypoint; consumes reached ones."""
    while rt.waypoints:
        tx, ty = cell_center(rt.waypoints[0], cell_size)
        if math.hypot(tx - rt.pose.x, ty - rt.pose.y) <= _REACH_FRACTION * cell_size:
            rt.waypoints.pop(0)
            continue
        break
    if not rt.waypoints:
        return 0.0, 0.0
    tx, ty = cell_center(rt.waypoints[0], cell_size)
    dx, dy = tx - rt.pose.x, ty - rt.pose.y
    if math.hypot(dx, dy) > _OFF_PATH_FACTOR * cell_size:
        raise RobotOffPath(f"robot {rt.spec_id} lost its route")
    err = wrap_angle(math.atan2(dy, dx) - rt.pose.theta)
    w = quantize_command(max(-w_max, min(w_max, _K_HEADING * err)))
    v = quantize_command(rt.cruise) if abs(err) < _ALIGN_RAD else 0.0
    return v, w


def validate_trace(trace, robot_ids) -> list[dict]:
    """Structural check of an input trace; returns events as plain dicts."""
    events = []
    for raw in trace:
        if not isinstance(raw, dict) or "tick" not in raw or "kind" not in raw:
            raise MalformedCommand(f"event needs tick and kind: {raw!r}")
        tick = raw["tick"]
        if not isinstance(tick, int) or tick < 1:
            raise MalformedCommand(f"event tick must be an integer >= 1: {raw!r}")
        kind = raw["kind"]
        if kind not in _EVENT_KINDS:
            raise MalformedCommand(f"unknown event kind {kind!r}")
        if kind == "increment":
            if raw.get("robot_id") not in robot_ids:
                raise UnknownRobot(f"no robot {raw.get('robot_id')!r}")
            dv, dw = raw.get("dv", 0.0), raw.get("dw", 0.0)
            if not (math.isfinite(dv) and math.isfinite(dw)):
                raise MalformedCommand("increment dv/dw must be finite")
        elif kind == "feedback":
            if not isinstance(raw.get("text"), str):
                raise MalformedCommand("feedback needs text")
        elif kind == "set_task_state":
            if raw.get("availability") not in (None, "available", "unavailable"):
                raise MalformedCommand(f"bad availability value {raw['availability']!r}")
            if raw.get("occupancy") not in (None, "clear", "occupied"):
                raise MalformedCommand(f"bad occupancy value {raw['occupancy']!r}")
        elif kind == "set_threshold":
            if not (isinstance(raw.get("meters"), (int, float)) and raw["meters"] > 0):
                raise MalformedCommand("set_threshold needs meters > 0")
        events.append(dict(raw))
    return events


def log_frame(tick, poses, auto_cmds, fused_cmds, wheel_speeds, alerts, phase,
              task_state, *, t_s, robot_order, dissonance=(), commands=()) -> dict:
    """One self-contained run-log record; robot sub-objects in roster order."""
    ids = set(robot_order)
    for name, mapping in (("poses", poses), ("auto", auto_cmds),
                          ("fused", fused_cmds), ("wheels", wheel_speeds)):
        if set(mapping) != ids:
            raise InconsistentIds(f"{name} ids {sorted(mapping)} != roster {sorted(ids)}")
    robots = []
    for rid in robot_order:
        auto, fused = auto_cmds[rid], fused_cmds[rid]
        wl, wr = wheel_speeds[rid]
        robots.append({
            "id": rid,
            "pose": poses[rid].to_json_dict(),
            "auto": {"v": auto.v, "w": auto.w},
            "fused": {"v": fused.v, "w": fused.w},
            "wheels": {"l": wl, "r": wr},
        })
    return {
        "tick": tick,
        "t_s": t_s,
        "phase": phase,
        "task_state": task_state.to_json_dict(),
        "robots": robots,
        "alerts": [a.to_json_dict() for a in alerts],
        "dissonance": list(dissonance),
        "commands": list(commands),
    }


class Simulation:
    """World state plus the per-tick step; one instance per run."""

    def __init__(self, scenario: Scenario, archive_path: str | None = None):
        self.scenario = scenario
        self.grid = scenario.grid
        # The run owns a private copy: ticks mutate task state and feedback
        # grows edges, and the caller's scenario must stay reusable.
        self.hypergraph = copy.deepcopy(scenario.hypergraph)
        self.phase = "ADeliver"
        self.tick_count = 0
        self.dwell_remaining = max(0, round(scenario.dwell_s / scenario.dt_s))
        self.proximity_m = scenario.thresholds.proximity_m
        self.archive = EpisodicArchive(archive_path)
        self.queue: deque[dict] = deque()
        self.frames: list[dict] = []
        self.limits = Limits(
            scenario.drive.v_max, scenario.drive.w_max,
            scenario.thresholds.dv_per_event, scenario.thresholds.dw_per_event)

        cs = self.grid.cell_size
        self.robots: dict[str, RobotRuntime] = {}
        for spec in scenario.robots:
            x, y = cell_center(spec.start, cs)
            self.robots[spec.id] = RobotRuntime(spec.id, spec.cruise_speed, RobotPose(x, y, 0.0))
        self.roster = [spec.id for spec in scenario.robots]

        # Deliverer's route is committed up front, under the scenario's
        # loaded task state.
        deliverer = scenario.deliverer
        try:
            path = plan_astar(self.grid, self.hypergraph, deliverer.start, deliverer.goal)
        except NoPath as exc:
            raise InvalidScenario(
                "deliverer cannot reach the workspace under the initial task state") from exc
        a_rt = self.robots[deliverer.id]
        a_rt.committed = list(path.cells)
        a_rt.waypoints = list(path.cells[1:])

        self._derive_occupancy()
        self._log_initial_frame()

    # -- roles ---------------------------------------------------------------

    @property
    def _a(self) -> RobotRuntime:
        return self.robots[self.scenario.deliverer.id]

    @property
    def _b(self) -> RobotRuntime:
        return self.robots[self.scenario.transporter.id]

    def _phase_index(self) -> int:
        try:
            return _PHASE_INDEX[self.phase]
        except KeyError:
            raise InvalidPhase(f"unknown phase {self.phase!r}") from None

    # -- queue ----------------------------------------------------------------

    def enqueue(self, event: dict) -> None:
        self.queue.append(validate_trace([event], set(self.roster))[0])

    def _drain_queue(self, tick: int):
        """Apply queued events in arrival order; returns (per-robot increments, echoes)."""
        increments: dict[str, list[HumanIncrement]] = {rid: [] for rid in self.roster}
        echoes = []
        while self.queue:
            ev = self.queue.popleft()
            echo = dict(ev)
            echo["accepted"] = True
            kind = ev["kind"]
            if kind == "increment":
                inc = self.limits.clamp_increment(HumanIncrement(
                    float(ev.get("dv", 0.0)), float(ev.get("dw", 0.0)), tick))
                if (inc.dv, inc.dw) != (ev.get("dv", 0.0), ev.get("dw", 0.0)):
                    echo["note"] = "clamped"
                increments[ev["robot_id"]].append(inc)
            elif kind == "set_task_state":
                avail = ev.get("availability")
                occ = ev.get("occupancy")
                self.hypergraph.set_task_state(
                    Availability(avail) if avail else None,
                    OccupancyFlag(occ) if occ else None)
            elif kind == "set_threshold":
                self.proximity_m = float(ev["meters"])
            elif kind == "feedback":
                echo.update(self._apply_feedback(ev))
            echoes.append(echo)
        return increments, echoes

    def _apply_feedback(self, ev: dict) -> dict:
        anchors = [CellCoord(int(c[0]), int(c[1])) for c in ev.get("anchors", [])]
        params = EncodeParams(archive=self.archive)
        added = 0
        archived = 0
        try:
            for triple in extract_triples(ev["text"], tick=self.tick_count):
                attr = classify_attribute(triple)
                edge_id = encode_to_hypergraph(self.hypergraph, attr, triple, anchors, params)
                if edge_id is None:
                    archived += 1
                else:
                    added += 1
        except (InteroceptError, ValueError) as exc:
            return {"accepted": False, "note": str(exc)}
        return {"accepted": True, "edges_added": added, "archived": archived}

    # -- world rules -----------------------------------------------------------

    def _deliverer_holds_pathway(self) -> bool:
        a = self._a
        pathway = set(self.scenario.pathway_cells)
        inside = _cell_of(a.pose, self.grid.cell_size) in pathway
        committed = any(c in pathway for c in a.waypoints)
        return inside or committed

    def _derive_occupancy(self) -> None:
        """Pathway is occupied while the deliverer holds or still needs it.

        Authoritative before the transporter's entry: an operator stamp is
        overwritten here, so it can neither open nor hold the gate. After
        entry the flag is the operator's to manage.
        """
        if self._phase_index() >= _PHASE_INDEX["BEnter"]:
            return
        occ = (OccupancyFlag.OCCUPIED if self._deliverer_holds_pathway()
               else OccupancyFlag.CLEAR)
        self.hypergraph.set_task_state(occupancy=occ)

    def _advance_phase(self) -> None:
        cs = self.grid.cell_size
        workspace = set(self.scenario.workspace_cells)
        phase = self.phase
        if phase == "ADeliver":
            a = self._a
            if _cell_of(a.pose, cs) in workspace:
                self.hypergraph.set_task_state(availability=Availability.AVAILABLE)
                here = _cell_of(a.pose, cs)
                idx = a.committed.index(here) if here in a.committed else len(a.committed) - 1
                a.waypoints = list(reversed(a.committed[:idx]))
                a.committed = [here] + a.waypoints
                self.phase = "AReverse"
        elif phase == "AReverse":
            self.phase = "BWait"
        elif phase == "BWait":
            # Gate on the derived corridor tenancy, not the stored flag: an
            # operator stamp must not be able to open the gate early.
            if not self._deliverer_holds_pathway():
                self.hypergraph.set_task_state(occupancy=OccupancyFlag.CLEAR)
                b = self._b
                try:
                    path = plan_astar(self.grid, self.hypergraph,
                                      _cell_of(b.pose, cs), self.scenario.deliverer.goal)
                except NoPath:
                    return  # blocked by another precondition; retry next tick
                b.committed = list(path.cells)
                b.waypoints = list(path.cells[1:])
                self.phase = "BEnter"
        elif phase == "BEnter":
            if _cell_of(self._b.pose, cs) in workspace:
                self._b.waypoints = []
                self.phase = "Handover"
        elif phase == "Handover":
            self.dwell_remaining -= 1
            if self.dwell_remaining <= 0:
                b = self._b
                try:
                    path = plan_astar(self.grid, self.hypergraph,
                                      _cell_of(b.pose, cs), self.scenario.transporter.goal)
                except NoPath:
                    return  # exit route blocked (e.g. stamped occupied); retry
                b.committed = list(path.cells)
                b.waypoints = list(path.cells[1:])
                self.phase = "BTransport"
        elif phase == "BTransport":
            if _cell_of(self._b.pose, cs) == self.scenario.transporter.goal:
                self._b.waypoints = []
                self.phase = "Done"
        elif phase != "Done":
            raise InvalidPhase(f"unknown phase {phase!r}")

    # -- stepping ---------------------------------------------------------------

    def _log_initial_frame(self) -> None:
        zero_auto = {rid: AutonomousCommand(0.0, 0.0, 0) for rid in self.roster}
        zero_fused = {rid: FusedCommand(0.0, 0.0, 0) for rid in self.roster}
        wheels = {rid: to_wheel_speeds(0.0, 0.0, self.scenario.drive) for rid in self.roster}
        self.frames.append(log_frame(
            0, {rid: rt.pose for rid, rt in self.robots.items()},
            zero_auto, zero_fused, wheels, [], self.phase, self.hypergraph.state,
            t_s=0.0, robot_order=self.roster))

    def tick(self) -> dict:
        self.tick_count += 1
        tick = self.tick_count
        dt = self.scenario.dt_s
        increments, echoes = self._drain_queue(tick)

        self._advance_phase()
        self._derive_occupancy()
        gate_b = self._phase_index() < _PHASE_INDEX["BEnter"]

        autos: dict[str, AutonomousCommand] = {}
        fused: dict[str, FusedCommand] = {}
        wheels: dict[str, tuple[float, float]] = {}
        dissonance = []
        for rid in self.roster:
            rt = self.robots[rid]
            if self.phase == "Done" or (gate_b and rt is self._b) or self.phase == "Handover":
                v, w = 0.0, 0.0
                if self.phase == "Handover" and rt is self._a:
                    # The deliverer may still be driving home during the dwell.
                    v, w = waypoint_command(rt, self.grid.cell_size, self.limits.w_max)
            else:
                v, w = waypoint_command(rt, self.grid.cell_size, self.limits.w_max)
            auto = AutonomousCommand(v, w, tick)
            # Increments addressed to the gated transporter are dropped, so no
            # human input can push it toward the workspace early.
            incs = () if (gate_b and rt is self._b) else tuple(increments[rid])
            raw = fuse(auto, incs, self.limits)
            executed = raw if not incs else FusedCommand(
                quantize_command(raw.v), quantize_command(raw.w), tick)
            autos[rid] = auto
            fused[rid] = executed
            wheels[rid] = to_wheel_speeds(executed.v, executed.w, self.scenario.drive)
            rt.pose = integrate_unicycle(rt.pose, executed.v, executed.w, dt)
            rt.station_m += abs(executed.v) * dt
            rec = record_dissonance(auto, executed, incs, rt.station_m, self.limits)
            dissonance.append({"robot_id": rid, **rec.to_json_dict()})

        alerts = check_proximity(
            [(rid, rt.pose.x, rt.pose.y) for rid, rt in self.robots.items()],
            self.proximity_m, tick=tick)
        frame = log_frame(
            tick, {rid: rt.pose for rid, rt in self.robots.items()},
            autos, fused, wheels, alerts, self.phase, self.hypergraph.state,
            t_s=tick * dt, robot_order=self.roster,
            dissonance=dissonance, commands=echoes)
        self.frames.append(frame)
        return frame

    def run(self, trace=(), max_ticks: int = 3000) -> list[dict]:
        """Step until the scenario completes, feeding trace events by tick."""
        by_tick: dict[int, list[dict]] = {}
        for ev in validate_trace(trace, set(self.roster)):
            by_tick.setdefault(ev["tick"], []).append(ev)
        while self.phase != "Done" and self.tick_count < max_ticks:
            for ev in by_tick.get(self.tick_count + 1, ()):
                self.queue.append(ev)
            self.tick()
        return self.frames


def simulate(scenario: Scenario, trace=(), max_ticks: int = 3000) -> list[dict]:
    """Run the delivery scenario to completion; returns the frame log."""
    return Simulation(scenario).run(trace, max_ticks)


def write_run_log(frames, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(frame, separators=(",", ":")) + "\n")


def read_run_log(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def check_log_invariants(frames, scenario: Scenario) -> list[str]:
    """Model checks over a frame log; returns human-readable violations."""
    violations = []
    cs = scenario.grid.cell_size
    workspace = set(scenario.workspace_cells)
    b_id = scenario.transporter.id
    drive = scenario.drive
    dt = scenario.dt_s
    last_phase = -1
    prev_poses = None
    for frame in frames:
        idx = _PHASE_INDEX.get(frame["phase"])
        if idx is None:
            violations.append(f"tick {frame['tick']}: unknown phase {frame['phase']!r}")
            continue
        if idx < last_phase:
            violations.append(f"tick {frame['tick']}: phase regressed to {frame['phase']}")
        last_phase = idx

        robots = {r["id"]: r for r in frame["robots"]}
        b = robots.get(b_id)
        if b is not None and frame["task_state"]["occupancy"] == "occupied":
            cell = CellCoord(int(math.floor(b["pose"]["x"] / cs)),
                             int(math.floor(b["pose"]["y"] / cs)))
            if cell in workspace:
                violations.append(
                    f"tick {frame['tick']}: {b_id} inside workspace while pathway occupied")

        for rid, r in robots.items():
            v, w = r["fused"]["v"], r["fused"]["w"]
            back = from_wheel_speeds(r["wheels"]["l"], r["wheels"]["r"], drive)
            if back != (v, w):
                violations.append(f"tick {frame['tick']}: {rid} wheel speeds inconsistent")
            if prev_poses is not None:
                prev = prev_poses[rid]
                redone = integrate_unicycle(
                    RobotPose(prev["x"], prev["y"], prev["theta"]), v, w, dt)
                err = max(abs(redone.x - r["pose"]["x"]), abs(redone.y - r["pose"]["y"]),
                          abs(wrap_angle(redone.theta - r["pose"]["theta"])))
                if err > 1e-9:
                    violations.append(
                        f"tick {frame['tick']}: {rid} pose deviates from its commands by {err:.2e}")
        prev_poses = {rid: r["pose"] for rid, r in robots.items()}
    return violations
