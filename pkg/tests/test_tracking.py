import math
import random

import numpy as np
import pytest

from interocept.errors import DuplicateId, EmptyPath, InvalidRange
from interocept.grid_map import CellCoord, build_grid
from interocept.planner import Path
from interocept.tracking import (
    MonteCarlo,
    Trapezoid,
    VelocityProfile,
    arc_length,
    check_proximity,
    position_along_path,
    visit_heatmap,
)


def triangle_profile():
    """0 -> 2 -> 0 m/s over 4 s at 10 Hz; closed-form area 4 m."""
    return VelocityProfile(10.0, tuple(min(k * 0.1, 4 - k * 0.1) for k in range(41)))


def mc_convergence_slope(seeds=50, sizes=(100, 1000, 10000, 100000)):
    """Log-log slope of mean |MC - closed form| against sample count."""
    profile = triangle_profile()
    mean_errors = []
    for n in sizes:
        errors = [abs(arc_length(profile, 0, 4, MonteCarlo(n, s)) - 4.0) for s in range(seeds)]
        mean_errors.append(sum(errors) / len(errors))
    return float(np.polyfit(np.log(sizes), np.log(mean_errors), 1)[0])


def test_constant_profile_integrates_exactly():
    profile = VelocityProfile(20.0, (1.0,) * 201)
    assert arc_length(profile, 0.0, 10.0) == pytest.approx(10.0, rel=1e-12)


def test_triangle_profile_area():
    assert arc_length(triangle_profile(), 0.0, 4.0) == pytest.approx(4.0, rel=1e-12)


def test_monte_carlo_close_to_closed_form():
    result = arc_length(triangle_profile(), 0.0, 4.0, MonteCarlo(100000, 7))
    assert abs(result - 4.0) < 0.04


def test_monte_carlo_deterministic_per_seed():
    profile = triangle_profile()
    a = arc_length(profile, 0.5, 3.5, MonteCarlo(1000, 42))
    b = arc_length(profile, 0.5, 3.5, MonteCarlo(1000, 42))
    c = arc_length(profile, 0.5, 3.5, MonteCarlo(1000, 43))
    assert a == b
    assert a != c


def test_invalid_ranges_rejected():
    profile = triangle_profile()
    with pytest.raises(InvalidRange):
        arc_length(profile, -0.1, 1.0)
    with pytest.raises(InvalidRange):
        arc_length(profile, 2.0, 1.0)
    with pytest.raises(InvalidRange):
        arc_length(profile, 0.0, 4.5)


def test_partial_window_uses_interpolated_endpoints():
    profile = triangle_profile()
    # v is linear 0..2 on [0, 2]: integral over [0.55, 1.25] = mean * width.
    expected = 0.5 * (0.55 + 1.25) * 0.7
    assert arc_length(profile, 0.55, 1.25) == pytest.approx(expected, rel=1e-12)


def test_trapezoid_additivity():
    rng = random.Random(3)
    for _ in range(30):
        samples = tuple(rng.uniform(0, 2) for _ in range(rng.randrange(2, 60)))
        profile = VelocityProfile(20.0, samples)
        cuts = sorted(rng.uniform(0, profile.duration_s) for _ in range(3))
        a, b, c = cuts
        whole = arc_length(profile, a, c)
        split = arc_length(profile, a, b) + arc_length(profile, b, c)
        assert split == pytest.approx(whole, rel=1e-12, abs=1e-12)


def test_monte_carlo_error_scales_as_inverse_sqrt():
    slope = mc_convergence_slope()
    assert abs(slope + 0.5) <= 0.15


def straight_path():
    return Path((CellCoord(0, 0), CellCoord(1, 0), CellCoord(2, 0)), 2.0, 2.0)


def test_position_at_zero_is_first_center():
    assert position_along_path(straight_path(), 1.0, 0.0) == (0.5, 0.5)


def test_position_interpolates_between_centers():
    x, y = position_along_path(straight_path(), 1.0, 1.5)
    assert (x, y) == pytest.approx((2.0, 0.5))


def test_position_clamps_past_the_end():
    assert position_along_path(straight_path(), 1.0, 1e6) == (2.5, 0.5)


def test_empty_path_rejected():
    with pytest.raises(EmptyPath):
        position_along_path(Path((), 0.0, 0.0), 1.0, 0.0)


def test_position_is_continuous_and_on_polyline():
    path = Path(
        (CellCoord(0, 0), CellCoord(1, 1), CellCoord(2, 1), CellCoord(2, 2)), 0.0, 0.0
    )
    cell_size = 0.5
    step = 1e-3
    total = (2 * math.sqrt(2) * 0.5 + 0.5 + 0.5)  # generous overestimate
    prev = position_along_path(path, cell_size, 0.0)
    s = step
    while s < total:
        cur = position_along_path(path, cell_size, s)
        assert math.hypot(cur[0] - prev[0], cur[1] - prev[1]) <= step * (1 + 1e-6)
        prev = cur
        s += step


def test_proximity_boundary_is_strict():
    positions = [("a", 0.0, 0.0), ("b", 3.0, 4.0)]
    assert check_proximity(positions, 5.0) == []
    alerts = check_proximity(positions, 5.1)
    assert len(alerts) == 1
    assert alerts[0].robot_a == "a"
    assert alerts[0].robot_b == "b"
    assert alerts[0].distance_m == 5.0


def test_proximity_all_pairs():
    positions = [("r3", 0.0, 0.0), ("r1", 0.1, 0.0), ("r2", 0.0, 0.1)]
    alerts = check_proximity(positions, 1.0, tick=9)
    assert len(alerts) == 3
    assert [(a.robot_a, a.robot_b) for a in alerts] == [
        ("r1", "r2"), ("r1", "r3"), ("r2", "r3")]
    assert all(a.tick == 9 for a in alerts)
    assert all(a.distance_m < a.threshold_m for a in alerts)


def test_duplicate_ids_rejected():
    with pytest.raises(DuplicateId):
        check_proximity([("a", 0, 0), ("a", 1, 1)], 5.0)


def test_proximity_matches_brute_force():
    rng = random.Random(21)
    for _ in range(25):
        n = rng.randrange(2, 8)
        positions = [(f"r{i}", rng.uniform(0, 3), rng.uniform(0, 3)) for i in range(n)]
        threshold = rng.uniform(0.2, 2.0)
        expected = set()
        for i in range(n):
            for j in range(i + 1, n):
                d = math.dist(positions[i][1:], positions[j][1:])
                if d < threshold:
                    expected.add(tuple(sorted((positions[i][0], positions[j][0]))))
        got = {(a.robot_a, a.robot_b) for a in check_proximity(positions, threshold)}
        assert got == expected


def test_heatmap_empty_log():
    grid = build_grid(3, 2, 1.0)
    hm = visit_heatmap([], grid)
    assert hm.counts == [[0, 0, 0], [0, 0, 0]]
    assert hm.discarded == 0


def test_heatmap_counts_repeat_visits():
    grid = build_grid(3, 3, 1.0)
    log = [(t, "a", 1.5, 1.5) for t in range(5)]
    hm = visit_heatmap(log, grid)
    assert hm.counts[1][1] == 5
    assert sum(sum(row) for row in hm.counts) == 5


def test_heatmap_floor_convention_on_boundary():
    grid = build_grid(3, 3, 1.0)
    hm = visit_heatmap([(0, "a", 1.0, 0.0)], grid)
    assert hm.counts[0][1] == 1


def test_heatmap_discards_out_of_bounds():
    grid = build_grid(2, 2, 0.5)
    log = [(0, "a", -0.1, 0.2), (1, "a", 0.3, 0.3), (2, "b", 1.0, 0.0)]
    hm = visit_heatmap(log, grid)
    assert hm.discarded == 2  # negative x and x == full width both fall outside
    assert hm.counts[0][0] == 1
