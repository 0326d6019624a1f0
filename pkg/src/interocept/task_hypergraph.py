"""Task-space overlay on the grid.

Hyperedges of unbounded arity attach terrain features and task preconditions
to sets of cells (and abstract task nodes). A single global TaskState — the
availability of the target workspace plus the occupancy of the shared
pathway — gates which moves are admissible: planner move costs are inflated
by terrain multipliers and by penalties for violated preconditions, with an
infinite penalty marking a cell non-steppable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

from .errors import CellIsObstacle, EmptyMembers, NotAPrecondition, UnknownVertex
from .grid_map import CellCoord, GridMap, Occupancy

INFINITE = math.inf


class Availability(Enum):
    AVAILABLE = "available"
    UNAVAILABLE = "unavailable"


class OccupancyFlag(Enum):
    CLEAR = "clear"
    OCCUPIED = "occupied"


@dataclass(frozen=True)
class TaskState:
    availability: Availability = Availability.UNAVAILABLE
    occupancy: OccupancyFlag = OccupancyFlag.CLEAR

    def to_json_dict(self) -> dict:
        return {"availability": self.availability.value, "occupancy": self.occupancy.value}


@dataclass(frozen=True)
class TerrainFeature:
    label: str
    multiplier: float  # >= 1, scales move cost into covered cells


@dataclass(frozen=True)
class TaskPrecondition:
    """Admissibility requirement on covered cells.

    None in a required field means "any". violation_penalty is added to the
    move cost when the requirement fails; math.inf makes the cell
    non-steppable.
    """

    required_availability: Optional[Availability] = None
    required_occupancy: Optional[OccupancyFlag] = None
    violation_penalty: float = INFINITE


EdgeAttribute = Union[TerrainFeature, TaskPrecondition]


@dataclass(frozen=True)
class HyperVertex:
    id: int
    cell: Optional[CellCoord] = None
    task_name: Optional[str] = None

    def __post_init__(self):
        if (self.cell is None) == (self.task_name is None):
            raise ValueError("vertex must be spatial (cell) xor task node (task_name)")


@dataclass(frozen=True)
class HyperEdge:
    id: int
    members: frozenset[int]
    attribute: EdgeAttribute


def precondition_holds(edge: HyperEdge, state: TaskState) -> bool:
    """True iff the edge's precondition is satisfied by the task state."""
    attr = edge.attribute
    if not isinstance(attr, TaskPrecondition):
        raise NotAPrecondition(f"edge {edge.id} carries a terrain attribute")
    if attr.required_availability is not None and attr.required_availability is not state.availability:
        return False
    if attr.required_occupancy is not None and attr.required_occupancy is not state.occupancy:
        return False
    return True


@dataclass
class TaskHypergraph:
    """Vertices, hyperedges and the mutable global task state.

    Edge structure is immutable once the scenario is loaded; only `state`
    changes at runtime (single writer: the scenario stepper). cell_index maps
    each covered cell to the ids of edges whose member set includes it.
    """

    vertices: dict[int, HyperVertex] = field(default_factory=dict)
    edges: dict[int, HyperEdge] = field(default_factory=dict)
    state: TaskState = field(default_factory=TaskState)
    cell_index: dict[CellCoord, set[int]] = field(default_factory=dict)
    _next_vertex_id: int = 0
    _next_edge_id: int = 0

    # -- construction --------------------------------------------------------

    def add_vertex(self, cell: Optional[CellCoord] = None, task_name: Optional[str] = None,
                   vertex_id: Optional[int] = None) -> int:
        vid = self._next_vertex_id if vertex_id is None else vertex_id
        if vid in self.vertices:
            raise ValueError(f"duplicate vertex id {vid}")
        self.vertices[vid] = HyperVertex(vid, CellCoord(*cell) if cell is not None else None, task_name)
        self._next_vertex_id = max(self._next_vertex_id, vid + 1)
        return vid

    def vertex_for_cell(self, cell: CellCoord) -> int:
        """Id of the spatial vertex for this cell, creating it on first use."""
        cell = CellCoord(*cell)
        for v in self.vertices.values():
            if v.cell == cell:
                return v.id
        return self.add_vertex(cell=cell)

    def add_hyperedge(self, members, attribute: EdgeAttribute, edge_id: Optional[int] = None) -> int:
        members = frozenset(members)
        if not members:
            raise EmptyMembers("hyperedge needs at least one member vertex")
        for vid in members:
            if vid not in self.vertices:
                raise UnknownVertex(f"vertex {vid} not in hypergraph")
        eid = self._next_edge_id if edge_id is None else edge_id
        if eid in self.edges:
            raise ValueError(f"duplicate edge id {eid}")
        self.edges[eid] = HyperEdge(eid, members, attribute)
        self._next_edge_id = max(self._next_edge_id, eid + 1)
        for vid in members:
            cell = self.vertices[vid].cell
            if cell is not None:
                self.cell_index.setdefault(cell, set()).add(eid)
        return eid

    # -- state ---------------------------------------------------------------

    def set_task_state(self, availability: Optional[Availability] = None,
                       occupancy: Optional[OccupancyFlag] = None) -> TaskState:
        """Update only the provided fields; returns the full new state."""
        updates = {}
        if availability is not None:
            updates["availability"] = availability
        if occupancy is not None:
            updates["occupancy"] = occupancy
        self.state = replace(self.state, **updates) if updates else self.state
        return self.state

    # -- cost queries ---------------------------------------------------------

    def edges_covering(self, cell: CellCoord) -> list[HyperEdge]:
        ids = self.cell_index.get(CellCoord(*cell), ())
        return [self.edges[eid] for eid in sorted(ids)]

    def effective_move_cost(self, grid: GridMap, dest: CellCoord, base_cost: float) -> float:
        """Cost of stepping into dest under the current task state.

        base_cost is scaled by the destination cell's terrain multiplier and
        by every covering terrain edge; every covering precondition edge that
        fails adds its violation penalty (inf == non-steppable).
        """
        dest = CellCoord(*dest)
        cell = grid.cell_at(dest)
        if cell.occupancy is Occupancy.OBSTACLE:
            raise CellIsObstacle(dest)
        cost = base_cost * cell.terrain_multiplier
        penalty = 0.0
        for edge in self.edges_covering(dest):
            attr = edge.attribute
            if isinstance(attr, TerrainFeature):
                cost *= attr.multiplier
            elif not precondition_holds(edge, self.state):
                penalty += attr.violation_penalty
        return cost + penalty

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        vertices = []
        for vid in sorted(self.vertices):
            v = self.vertices[vid]
            if v.cell is not None:
                vertices.append({"id": vid, "cell": [v.cell.col, v.cell.row]})
            else:
                vertices.append({"id": vid, "task_name": v.task_name})
        edges = []
        for eid in sorted(self.edges):
            e = self.edges[eid]
            edges.append({"id": eid, "members": sorted(e.members), "attribute": _attribute_to_dict(e.attribute)})
        return {"vertices": vertices, "edges": edges, "initial_state": self.state.to_json_dict()}


def _attribute_to_dict(attr: EdgeAttribute) -> dict:
    if isinstance(attr, TerrainFeature):
        return {"type": "terrain", "label": attr.label, "multiplier": attr.multiplier}
    return {
        "type": "precondition",
        "required_availability": attr.required_availability.value if attr.required_availability else "any",
        "required_occupancy": attr.required_occupancy.value if attr.required_occupancy else "any",
        "violation_penalty": "infinite" if math.isinf(attr.violation_penalty) else attr.violation_penalty,
    }


def _attribute_from_dict(data: dict) -> EdgeAttribute:
    kind = data.get("type")
    if kind == "terrain":
        return TerrainFeature(data["label"], float(data["multiplier"]))
    if kind == "precondition":
        avail = data.get("required_availability", "any")
        occ = data.get("required_occupancy", "any")
        penalty = data.get("violation_penalty", "infinite")
        return TaskPrecondition(
            None if avail == "any" else Availability(avail),
            None if occ == "any" else OccupancyFlag(occ),
            INFINITE if penalty == "infinite" else float(penalty),
        )
    raise ValueError(f"unknown edge attribute type {kind!r}")


def hypergraph_from_dict(data: dict) -> TaskHypergraph:
    hg = TaskHypergraph()
    for v in data.get("vertices", []):
        if "cell" in v:
            hg.add_vertex(cell=CellCoord(*v["cell"]), vertex_id=v["id"])
        else:
            hg.add_vertex(task_name=v["task_name"], vertex_id=v["id"])
    for e in data.get("edges", []):
        hg.add_hyperedge(e["members"], _attribute_from_dict(e["attribute"]), edge_id=e["id"])
    initial = data.get("initial_state", {})
    hg.state = TaskState(
        Availability(initial.get("availability", "unavailable")),
        OccupancyFlag(initial.get("occupancy", "clear")),
    )
    return hg


def load_hypergraph(path: str) -> TaskHypergraph:
    with open(path, encoding="utf-8") as fh:
        return hypergraph_from_dict(json.load(fh))


def save_hypergraph(hg: TaskHypergraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(hg.to_json_dict(), fh, indent=2)
