"""Scenario files: the map, task overlay, robot roster and run constants.

The harness runs a two-robot delivery handover: robots[0] is the deliverer
(drives to the workspace, then backs out), robots[1] is the transporter
(waits for the pathway, enters, receives at the workspace, carries to its
goal). The deliverer's goal must be a workspace cell; the transporter's goal
is its final drop-off.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..errors import InvalidScenario
from ..grid_map import CellCoord, GridMap, map_from_dict
from ..task_hypergraph import TaskHypergraph, hypergraph_from_dict
from .diff_drive import DiffDriveParams

_TOP_KEYS = {
    "map", "hypergraph", "robots", "workspace_cells", "pathway_cells",
    "dwell_s", "dt_s", "drive", "thresholds",
}
_ROBOT_KEYS = {"id", "start", "goal", "cruise_speed"}


@dataclass(frozen=True)
class Thresholds:
    proximity_m: float = 0.3
    dv_per_event: float = 0.2   # per-event clamp on human dv
    dw_per_event: float = 0.5   # per-event clamp on human dw


@dataclass(frozen=True)
class RobotSpec:
    id: str
    start: CellCoord
    goal: CellCoord
    cruise_speed: float = 0.5


@dataclass(frozen=True)
class Scenario:
    grid: GridMap
    hypergraph: TaskHypergraph
    robots: tuple[RobotSpec, ...]
    workspace_cells: tuple[CellCoord, ...]
    pathway_cells: tuple[CellCoord, ...]
    dwell_s: float = 3.0
    dt_s: float = 0.05
    drive: DiffDriveParams = field(
        default_factory=lambda: DiffDriveParams(0.0625, 0.25, 1.0, 2.0))
    thresholds: Thresholds = field(default_factory=Thresholds)

    @property
    def deliverer(self) -> RobotSpec:
        return self.robots[0]

    @property
    def transporter(self) -> RobotSpec:
        return self.robots[1]


def _cell(raw, grid: GridMap, what: str) -> CellCoord:
    try:
        cell = CellCoord(int(raw[0]), int(raw[1]))
    except (TypeError, ValueError, IndexError):
        raise InvalidScenario(f"{what}: expected [col, row], got {raw!r}") from None
    if not grid.in_bounds(cell):
        raise InvalidScenario(f"{what}: cell {tuple(cell)} outside the map")
    return cell


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise InvalidScenario("scenario root must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise InvalidScenario(f"unknown scenario keys: {sorted(unknown)}")
    for key in ("map", "hypergraph", "robots", "workspace_cells", "pathway_cells"):
        if key not in data:
            raise InvalidScenario(f"missing required key {key!r}")

    try:
        grid = map_from_dict(data["map"])
        hypergraph = hypergraph_from_dict(data["hypergraph"])
    except InvalidScenario:
        raise
    except Exception as exc:
        raise InvalidScenario(f"embedded map or hypergraph invalid: {exc}") from exc

    raw_robots = data["robots"]
    if not isinstance(raw_robots, list) or len(raw_robots) != 2:
        raise InvalidScenario("exactly two robots required (deliverer, transporter)")
    robots = []
    for raw in raw_robots:
        unknown = set(raw) - _ROBOT_KEYS
        if unknown:
            raise InvalidScenario(f"unknown robot keys: {sorted(unknown)}")
        if "id" not in raw or "start" not in raw or "goal" not in raw:
            raise InvalidScenario("robot needs id, start and goal")
        start = _cell(raw["start"], grid, f"robot {raw['id']} start")
        goal = _cell(raw["goal"], grid, f"robot {raw['id']} goal")
        for cell, what in ((start, "start"), (goal, "goal")):
            if not grid.is_free(cell):
                raise InvalidScenario(f"robot {raw['id']} {what} is an obstacle")
        cruise = float(raw.get("cruise_speed", 0.5))
        if cruise <= 0:
            raise InvalidScenario(f"robot {raw['id']} cruise_speed must be > 0")
        robots.append(RobotSpec(str(raw["id"]), start, goal, cruise))
    if robots[0].id == robots[1].id:
        raise InvalidScenario("robot ids must be distinct")

    workspace = tuple(_cell(c, grid, "workspace cell") for c in data["workspace_cells"])
    pathway = tuple(_cell(c, grid, "pathway cell") for c in data["pathway_cells"])
    if not workspace or not pathway:
        raise InvalidScenario("workspace_cells and pathway_cells must be nonempty")
    if robots[0].goal not in workspace:
        raise InvalidScenario("deliverer goal must be a workspace cell")

    drive_raw = data.get("drive", {})
    try:
        drive = DiffDriveParams(
            float(drive_raw.get("wheel_radius", 0.0625)),
            float(drive_raw.get("axle_length", 0.25)),
            float(drive_raw.get("v_max", 1.0)),
            float(drive_raw.get("w_max", 2.0)),
        )
    except ValueError as exc:
        raise InvalidScenario(str(exc)) from exc

    thr_raw = data.get("thresholds", {})
    thresholds = Thresholds(
        float(thr_raw.get("proximity_m", 0.3)),
        float(thr_raw.get("dv_per_event", 0.2)),
        float(thr_raw.get("dw_per_event", 0.5)),
    )

    dwell_s = float(data.get("dwell_s", 3.0))
    dt_s = float(data.get("dt_s", 0.05))
    if dwell_s < 0 or dt_s <= 0:
        raise InvalidScenario("dwell_s must be >= 0 and dt_s > 0")

    for cruise in (robots[0].cruise_speed, robots[1].cruise_speed):
        if cruise > drive.v_max:
            raise InvalidScenario("cruise_speed exceeds v_max")

    return Scenario(grid, hypergraph, tuple(robots), workspace, pathway,
                    dwell_s, dt_s, drive, thresholds)


def load_scenario(path: str) -> Scenario:
    """Parse a scenario file; malformed JSON reports line and column."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidScenario(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)


def default_scenario_path() -> str:
    """The packaged delivery-handover scenario."""
    return str(resources.files("interocept.sim").joinpath("data", "delivery.json"))


def default_scenario() -> Scenario:
    return load_scenario(default_scenario_path())
