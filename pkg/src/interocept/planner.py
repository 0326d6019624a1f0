"""Optimal path search over the grid with state-dependent hypergraph costs.

plan_astar is the production planner; plan_dijkstra is the same search with
a zero heuristic, kept as an independent oracle for equivalence testing.
Both relax edges with identical arithmetic and lazy-deletion reopening, so
they converge to the exact same floating-point minimum cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Callable

from .errors import BrokenPath, InvalidEndpoint, NoPath
from .grid_map import SQRT2, CellCoord, GridMap
from .task_hypergraph import TaskHypergraph


@dataclass(frozen=True)
class Path:
    cells: tuple[CellCoord, ...]
    total_cost: float   # sum of effective move costs, dimensionless
    length_m: float     # geometric polyline length in meters

    def to_json_dict(self) -> dict:
        return {
            "cells": [[c.col, c.row] for c in self.cells],
            "total_cost": self.total_cost,
            "length_m": self.length_m,
        }


# Relative deflation keeping the heuristic below true costs at float
# precision: summed step costs can round below the closed form by ~1e-15
# relative, which would otherwise break admissibility by ULPs on exact ties.
_FLOAT_SAFETY = 1.0 - 1e-12


def octile_distance(a: CellCoord, b: CellCoord) -> float:
    """Tightest admissible closed-form heuristic for unit/sqrt(2) moves."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return (max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)) * _FLOAT_SAFETY


def _check_endpoint(grid: GridMap, cell: CellCoord, name: str) -> CellCoord:
    cell = CellCoord(*cell)
    if not grid.in_bounds(cell):
        raise InvalidEndpoint(f"{name} {cell} out of bounds")
    if not grid.is_free(cell):
        raise InvalidEndpoint(f"{name} {cell} is an obstacle")
    return cell


def _geometric_length(cells, cell_size: float) -> float:
    total = 0.0
    for a, b in zip(cells, cells[1:]):
        diagonal = a.col != b.col and a.row != b.row
        total += (SQRT2 if diagonal else 1.0) * cell_size
    return total


def _search(grid: GridMap, hg: TaskHypergraph, start: CellCoord, goal: CellCoord,
            heuristic: Callable[[CellCoord], float]) -> tuple[Path, int]:
    start = _check_endpoint(grid, start, "start")
    goal = _check_endpoint(grid, goal, "goal")

    g_score = {start: 0.0}
    parent: dict[CellCoord, CellCoord] = {}
    # Heap entries (f, -g, seq): ties on f prefer larger g, then FIFO order.
    heap = [(heuristic(start), -0.0, 0, start)]
    seq = 1
    expanded = 0
    while heap:
        _, neg_g, _, node = heappop(heap)
        if -neg_g > g_score[node]:
            continue  # stale entry superseded by a better g
        if node == goal:
            cells = [node]
            while node != start:
                node = parent[node]
                cells.append(node)
            cells.reverse()
            return (
                Path(tuple(cells), g_score[goal], _geometric_length(cells, grid.cell_size)),
                expanded,
            )
        expanded += 1
        for nbr, base_cost in grid.neighbors(node):
            step = hg.effective_move_cost(grid, nbr, base_cost)
            if math.isinf(step):
                continue  # non-steppable under the current task state
            tentative = g_score[node] + step
            if nbr not in g_score or tentative < g_score[nbr]:
                g_score[nbr] = tentative
                parent[nbr] = node
                heappush(heap, (tentative + heuristic(nbr), -tentative, seq, nbr))
                seq += 1
    raise NoPath(f"no admissible path {start} -> {goal}")


def plan_astar(grid: GridMap, hg: TaskHypergraph, start, goal) -> Path:
    """Minimum-cost path under effective move costs (octile-heuristic A*)."""
    path, _ = astar_with_stats(grid, hg, start, goal)
    return path


def astar_with_stats(grid: GridMap, hg: TaskHypergraph, start, goal) -> tuple[Path, int]:
    """plan_astar plus the number of node expansions, for CLI reporting."""
    goal_cell = CellCoord(*goal)
    return _search(grid, hg, CellCoord(*start), goal_cell, lambda n: octile_distance(n, goal_cell))


def plan_dijkstra(grid: GridMap, hg: TaskHypergraph, start, goal) -> Path:
    """Oracle planner: identical search with h == 0."""
    path, _ = _search(grid, hg, CellCoord(*start), CellCoord(*goal), lambda n: 0.0)
    return path


def path_cost(grid: GridMap, hg: TaskHypergraph, path: Path) -> float:
    """Re-derive a path's cost by summing effective move costs step by step."""
    if not path.cells:
        raise BrokenPath("empty path")
    total = 0.0
    for a, b in zip(path.cells, path.cells[1:]):
        if max(abs(a.col - b.col), abs(a.row - b.row)) != 1:
            raise BrokenPath(f"{a} -> {b} is not an 8-neighbor step")
        base = SQRT2 if (a.col != b.col and a.row != b.row) else 1.0
        total += hg.effective_move_cost(grid, b, base)
    return total
