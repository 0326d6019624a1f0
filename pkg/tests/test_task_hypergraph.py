import math

import pytest

from interocept.errors import EmptyMembers, NotAPrecondition, UnknownVertex
from interocept.grid_map import SQRT2, CellCoord, build_grid
from interocept.task_hypergraph import (
    INFINITE,
    Availability,
    OccupancyFlag,
    TaskHypergraph,
    TaskPrecondition,
    TaskState,
    TerrainFeature,
    hypergraph_from_dict,
    precondition_holds,
)


@pytest.fixture
def hg():
    return TaskHypergraph()


def spatial_ids(hg, cells):
    return [hg.vertex_for_cell(CellCoord(*c)) for c in cells]


def test_pathway_edge_spans_multiple_cells(hg):
    ids = spatial_ids(hg, [(2, 1), (2, 2), (2, 3)])
    eid = hg.add_hyperedge(ids, TaskPrecondition(None, OccupancyFlag.CLEAR, INFINITE))
    for c in [(2, 1), (2, 2), (2, 3)]:
        assert eid in hg.cell_index[CellCoord(*c)]


def test_single_cell_terrain_edge(hg):
    (vid,) = spatial_ids(hg, [(0, 0)])
    eid = hg.add_hyperedge([vid], TerrainFeature("gravel", 1.8))
    assert hg.edges[eid].members == frozenset([vid])


def test_empty_members_rejected(hg):
    with pytest.raises(EmptyMembers):
        hg.add_hyperedge([], TerrainFeature("mud", 2.0))


def test_unknown_vertex_rejected(hg):
    with pytest.raises(UnknownVertex):
        hg.add_hyperedge([99], TerrainFeature("mud", 2.0))


def test_set_task_state_partial_updates(hg):
    hg.state = TaskState(Availability.AVAILABLE, OccupancyFlag.CLEAR)
    state = hg.set_task_state(occupancy=OccupancyFlag.OCCUPIED)
    assert state == TaskState(Availability.AVAILABLE, OccupancyFlag.OCCUPIED)
    state = hg.set_task_state(availability=Availability.UNAVAILABLE)
    assert state == TaskState(Availability.UNAVAILABLE, OccupancyFlag.OCCUPIED)
    assert hg.set_task_state() == state


def test_precondition_holds_matrix(hg):
    (vid,) = spatial_ids(hg, [(1, 1)])
    eid = hg.add_hyperedge([vid], TaskPrecondition(None, OccupancyFlag.CLEAR, INFINITE))
    edge = hg.edges[eid]
    assert precondition_holds(edge, TaskState(Availability.AVAILABLE, OccupancyFlag.CLEAR))
    assert not precondition_holds(edge, TaskState(Availability.AVAILABLE, OccupancyFlag.OCCUPIED))

    terrain_eid = hg.add_hyperedge([vid], TerrainFeature("mud", 2.0))
    with pytest.raises(NotAPrecondition):
        precondition_holds(hg.edges[terrain_eid], hg.state)


def test_effective_cost_identity(hg):
    grid = build_grid(5, 5, 1.0)
    assert hg.effective_move_cost(grid, CellCoord(2, 2), 1.0) == 1.0


def test_effective_cost_terrain_product(hg):
    grid = build_grid(5, 5, 1.0)
    (vid,) = spatial_ids(hg, [(2, 2)])
    hg.add_hyperedge([vid], TerrainFeature("mud", 2.5))
    got = hg.effective_move_cost(grid, CellCoord(2, 2), SQRT2)
    assert got == pytest.approx(2.5 * SQRT2, rel=1e-12)


def test_effective_cost_stacks_cell_multiplier_and_edges(hg):
    grid = build_grid(5, 5, 1.0, [], [((2, 2), "soft", 1.5)])
    ids = spatial_ids(hg, [(2, 2)])
    hg.add_hyperedge(ids, TerrainFeature("mud", 2.0))
    hg.add_hyperedge(ids, TerrainFeature("wet", 3.0))
    got = hg.effective_move_cost(grid, CellCoord(2, 2), 1.0)
    assert got == pytest.approx(1.5 * 2.0 * 3.0, rel=1e-12)


def test_occupied_pathway_is_non_steppable(hg):
    grid = build_grid(5, 5, 1.0)
    ids = spatial_ids(hg, [(2, 1), (2, 2)])
    hg.add_hyperedge(ids, TaskPrecondition(None, OccupancyFlag.CLEAR, INFINITE))
    hg.set_task_state(occupancy=OccupancyFlag.OCCUPIED)
    assert math.isinf(hg.effective_move_cost(grid, CellCoord(2, 2), 1.0))
    hg.set_task_state(occupancy=OccupancyFlag.CLEAR)
    assert hg.effective_move_cost(grid, CellCoord(2, 2), 1.0) == 1.0


def test_finite_penalty_is_added(hg):
    grid = build_grid(5, 5, 1.0)
    ids = spatial_ids(hg, [(1, 1)])
    hg.add_hyperedge(ids, TaskPrecondition(Availability.AVAILABLE, None, 7.0))
    hg.set_task_state(availability=Availability.UNAVAILABLE)
    assert hg.effective_move_cost(grid, CellCoord(1, 1), 1.0) == pytest.approx(8.0)


def test_effective_cost_never_below_base(hg):
    import random

    rng = random.Random(3)
    grid = build_grid(6, 6, 1.0, [], [((c, r), "t", 1 + 2 * rng.random()) for c in range(6) for r in range(6) if rng.random() < 0.4])
    for _ in range(8):
        cells = [(rng.randrange(6), rng.randrange(6)) for _ in range(rng.randrange(1, 4))]
        ids = spatial_ids(hg, cells)
        if rng.random() < 0.5:
            hg.add_hyperedge(ids, TerrainFeature("x", 1 + 2 * rng.random()))
        else:
            hg.add_hyperedge(ids, TaskPrecondition(None, OccupancyFlag.CLEAR, rng.choice([5.0, INFINITE])))
    hg.set_task_state(occupancy=OccupancyFlag.OCCUPIED)
    for col in range(6):
        for row in range(6):
            for base in (1.0, SQRT2):
                assert hg.effective_move_cost(grid, CellCoord(col, row), base) >= base


def test_state_change_does_not_mutate_edges(hg):
    ids = spatial_ids(hg, [(0, 0), (1, 0)])
    hg.add_hyperedge(ids, TaskPrecondition(None, OccupancyFlag.CLEAR, INFINITE))
    before = dict(hg.edges)
    hg.set_task_state(availability=Availability.AVAILABLE, occupancy=OccupancyFlag.OCCUPIED)
    assert hg.edges == before


def test_cell_index_round_trip(hg):
    ids = spatial_ids(hg, [(0, 0), (1, 1), (2, 2)])
    tn = hg.add_vertex(task_name="handover")
    eid = hg.add_hyperedge(ids + [tn], TaskPrecondition(None, None, 1.0))
    for vid in ids:
        cell = hg.vertices[vid].cell
        assert eid in hg.cell_index[cell]


def test_json_round_trip(hg):
    ids = spatial_ids(hg, [(2, 1), (2, 2)])
    hg.add_hyperedge(ids, TaskPrecondition(None, OccupancyFlag.CLEAR, INFINITE))
    hg.add_hyperedge([ids[0]], TerrainFeature("mud", 2.0))
    hg.set_task_state(availability=Availability.AVAILABLE)
    data = hg.to_json_dict()
    again = hypergraph_from_dict(data)
    assert again.to_json_dict() == data
    assert again.state == hg.state
    assert again.cell_index == hg.cell_index
