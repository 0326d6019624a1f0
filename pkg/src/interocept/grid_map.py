"""Occupancy-grid world model.

The grid is a dense lattice of cells addressed by (col, row), viewed as a
graph: free cells are vertices, admissible 8-connected moves are edges.
Cardinal moves cost 1, diagonal moves cost sqrt(2); terrain multipliers on
destination cells scale move cost downstream (see task_hypergraph).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

from .errors import CellIsObstacle, InvalidMultiplier, OutOfBounds

SQRT2 = math.sqrt(2.0)


class CellCoord(NamedTuple):
    col: int
    row: int


class Occupancy(Enum):
    FREE = "free"
    OBSTACLE = "obstacle"


@dataclass
class Cell:
    occupancy: Occupancy = Occupancy.FREE
    terrain_label: Optional[str] = None
    terrain_multiplier: float = 1.0


# Neighbor offsets in fixed clockwise order starting north (row decreases).
_NEIGHBOR_OFFSETS = (
    (0, -1),   # N
    (1, -1),   # NE
    (1, 0),    # E
    (1, 1),    # SE
    (0, 1),    # S
    (-1, 1),   # SW
    (-1, 0),   # W
    (-1, -1),  # NW
)


@dataclass
class GridMap:
    """Dense row-major occupancy/terrain lattice.

    Immutable by convention after construction: mutate only by rebuilding,
    so planners can share a map across threads without locking.
    """

    width: int
    height: int
    cell_size: float
    cells: list[Cell] = field(default_factory=list)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be > 0")
        if not self.cells:
            self.cells = [Cell() for _ in range(self.width * self.height)]
        if len(self.cells) != self.width * self.height:
            raise ValueError("cells length must equal width * height")

    def in_bounds(self, cell: CellCoord) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def cell_at(self, cell: CellCoord) -> Cell:
        if not self.in_bounds(cell):
            raise OutOfBounds(cell)
        return self.cells[cell[1] * self.width + cell[0]]

    def is_free(self, cell: CellCoord) -> bool:
        return self.in_bounds(cell) and self.cell_at(cell).occupancy is Occupancy.FREE

    def neighbors(self, cell: CellCoord) -> list[tuple[CellCoord, float]]:
        """Admissible 8-connected moves from a free cell.

        Returns (neighbor, base_cost) pairs in fixed N, NE, E, SE, S, SW, W,
        NW order. Diagonal moves cost sqrt(2) and are excluded when both of
        their adjacent cardinal cells are obstacles: a physical robot cannot
        pass through the zero-width gap between two touching corners.
        """
        cell = CellCoord(*cell)
        if not self.in_bounds(cell):
            raise OutOfBounds(cell)
        if self.cell_at(cell).occupancy is Occupancy.OBSTACLE:
            raise CellIsObstacle(cell)
        result = []
        for dc, dr in _NEIGHBOR_OFFSETS:
            dest = CellCoord(cell.col + dc, cell.row + dr)
            if not self.in_bounds(dest) or not self.is_free(dest):
                continue
            if dc != 0 and dr != 0:
                side_a = CellCoord(cell.col + dc, cell.row)
                side_b = CellCoord(cell.col, cell.row + dr)
                if not self.is_free(side_a) and not self.is_free(side_b):
                    continue
                result.append((dest, SQRT2))
            else:
                result.append((dest, 1.0))
        return result

    def to_json_dict(self) -> dict:
        obstacles = []
        terrain = []
        for row in range(self.height):
            for col in range(self.width):
                c = self.cells[row * self.width + col]
                if c.occupancy is Occupancy.OBSTACLE:
                    obstacles.append([col, row])
                elif c.terrain_label is not None or c.terrain_multiplier != 1.0:
                    terrain.append({
                        "cell": [col, row],
                        "label": c.terrain_label or "",
                        "multiplier": c.terrain_multiplier,
                    })
        return {
            "width": self.width,
            "height": self.height,
            "cell_size": self.cell_size,
            "obstacles": obstacles,
            "terrain": terrain,
        }


def build_grid(
    width: int,
    height: int,
    cell_size: float,
    obstacles: list[CellCoord] | list[tuple[int, int]] = (),
    terrain_patches: list[tuple] = (),
) -> GridMap:
    """Construct a grid with the listed obstacle and terrain cells.

    terrain_patches entries are (coord, label, multiplier); multipliers below
    1 are rejected because they would break octile-heuristic admissibility.
    """
    grid = GridMap(width, height, cell_size)
    for coord in obstacles:
        coord = CellCoord(*coord)
        grid.cell_at(coord).occupancy = Occupancy.OBSTACLE
    for coord, label, multiplier in terrain_patches:
        coord = CellCoord(*coord)
        if multiplier < 1.0:
            raise InvalidMultiplier(multiplier)
        c = grid.cell_at(coord)
        c.terrain_label = label
        c.terrain_multiplier = float(multiplier)
    return grid


_MAP_KEYS = {"width", "height", "cell_size", "obstacles", "terrain"}
_TERRAIN_KEYS = {"cell", "label", "multiplier"}


def map_from_dict(data: dict) -> GridMap:
    unknown = set(data) - _MAP_KEYS
    if unknown:
        raise ValueError(f"unknown map keys: {sorted(unknown)}")
    patches = []
    for entry in data.get("terrain", []):
        bad = set(entry) - _TERRAIN_KEYS
        if bad:
            raise ValueError(f"unknown terrain keys: {sorted(bad)}")
        patches.append((CellCoord(*entry["cell"]), entry["label"], entry["multiplier"]))
    return build_grid(
        data["width"],
        data["height"],
        data["cell_size"],
        [CellCoord(*c) for c in data.get("obstacles", [])],
        patches,
    )


def load_map(path: str) -> GridMap:
    with open(path, encoding="utf-8") as fh:
        return map_from_dict(json.load(fh))


def save_map(grid: GridMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(grid.to_json_dict(), fh, indent=2)
