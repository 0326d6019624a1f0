"""Arc-length tracking, proximity alerting and visit heatmaps.

Robot station along a planned path is the integral of its velocity profile.
The trapezoid integrator is the production path (exact for the piecewise
linear profiles we record); the Monte Carlo estimator mirrors it for
cross-validation and stays deterministic under a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateId, EmptyPath, InvalidRange
from .grid_map import GridMap


@dataclass(frozen=True)
class VelocityProfile:
    sample_rate_hz: float
    samples: tuple[float, ...]

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise InvalidRange("sample rate must be > 0")
        if len(self.samples) < 1:
            raise InvalidRange("profile needs at least one sample")
        object.__setattr__(self, "samples", tuple(float(v) for v in self.samples))

    @property
    def duration_s(self) -> float:
        return (len(self.samples) - 1) / self.sample_rate_hz

    def value_at(self, t: float) -> float:
        """Linear interpolation between samples; constant outside the grid."""
        dt = 1.0 / self.sample_rate_hz
        k = int(t / dt)
        if k < 0:
            return self.samples[0]
        if k >= len(self.samples) - 1:
            return self.samples[-1]
        frac = t / dt - k
        return self.samples[k] * (1.0 - frac) + self.samples[k + 1] * frac


@dataclass(frozen=True)
class Trapezoid:
    pass


@dataclass(frozen=True)
class MonteCarlo:
    n_samples: int
    seed: int


@dataclass(frozen=True)
class ProximityAlert:
    tick: int
    robot_a: str
    robot_b: str
    distance_m: float
    threshold_m: float

    def to_json_dict(self) -> dict:
        return {
            "tick": self.tick,
            "robot_a": self.robot_a,
            "robot_b": self.robot_b,
            "distance_m": self.distance_m,
            "threshold_m": self.threshold_m,
        }


@dataclass
class Heatmap:
    counts: list[list[int]]    # [row][col]
    discarded: int = 0         # poses outside map bounds

    def to_json_dict(self) -> dict:
        return {"counts": self.counts, "discarded": self.discarded}


def _cumulative_to(profile: VelocityProfile, t: float) -> float:
    """Integral of the piecewise-linear interpolant from 0 to t."""
    dt = 1.0 / profile.sample_rate_hz
    k = min(int(t / dt), len(profile.samples) - 1)
    total = 0.0
    for i in range(k):
        total += 0.5 * (profile.samples[i] + profile.samples[i + 1]) * dt
    t_k = k * dt
    if t > t_k:
        total += 0.5 * (profile.samples[k] + profile.value_at(t)) * (t - t_k)
    return total


def arc_length(profile: VelocityProfile, t0: float, t1: float, method=Trapezoid()) -> float:
    """Distance travelled over [t0, t1] according to the velocity profile."""
    duration = profile.duration_s
    slack = 1e-9 * max(1.0, duration)  # tolerate float drift from tick math
    if t0 < 0 or t1 < t0 or t1 > duration + slack:
        raise InvalidRange(f"[{t0}, {t1}] outside [0, {duration}]")
    t1 = min(t1, duration)
    t0 = min(t0, t1)
    if isinstance(method, Trapezoid):
        return _cumulative_to(profile, t1) - _cumulative_to(profile, t0)
    if isinstance(method, MonteCarlo):
        if method.n_samples < 1:
            raise InvalidRange("Monte Carlo needs at least one draw")
        if t1 == t0:
            return 0.0
        rng = np.random.default_rng(method.seed)
        times = rng.uniform(t0, t1, method.n_samples)
        grid = np.arange(len(profile.samples)) / profile.sample_rate_hz
        values = np.interp(times, grid, np.asarray(profile.samples))
        return float(values.mean() * (t1 - t0))
    raise TypeError(f"unknown integration method {method!r}")


def cell_center(cell, cell_size: float) -> tuple[float, float]:
    return ((cell[0] + 0.5) * cell_size, (cell[1] + 0.5) * cell_size)


def position_along_path(path, cell_size: float, s: float) -> tuple[float, float]:
    """Point at arc length s along the polyline of cell centers.

    Stations past the end clamp to the final center so a finished robot
    parks at its goal.
    """
    if not path.cells:
        raise EmptyPath("path has no cells")
    centers = [cell_center(c, cell_size) for c in path.cells]
    remaining = max(0.0, s)
    for (x0, y0), (x1, y1) in zip(centers, centers[1:]):
        seg = math.hypot(x1 - x0, y1 - y0)
        if remaining <= seg:
            frac = remaining / seg if seg > 0 else 0.0
            return (x0 + frac * (x1 - x0), y0 + frac * (y1 - y0))
        remaining -= seg
    return centers[-1]


def path_length_m(path, cell_size: float) -> float:
    if not path.cells:
        raise EmptyPath("path has no cells")
    centers = [cell_center(c, cell_size) for c in path.cells]
    return sum(math.hypot(x1 - x0, y1 - y0) for (x0, y0), (x1, y1) in zip(centers, centers[1:]))


def check_proximity(positions, threshold_m: float, tick: int = 0) -> list[ProximityAlert]:
    """Alerts for every unordered pair strictly closer than the threshold."""
    if threshold_m <= 0:
        raise ValueError("threshold must be > 0")
    seen = set()
    for rid, _, _ in positions:
        if rid in seen:
            raise DuplicateId(rid)
        seen.add(rid)
    alerts = []
    for i, (id_a, xa, ya) in enumerate(positions):
        for id_b, xb, yb in positions[i + 1:]:
            d = math.hypot(xb - xa, yb - ya)
            if d < threshold_m:
                a, b = sorted((id_a, id_b))
                alerts.append(ProximityAlert(tick, a, b, d, threshold_m))
    alerts.sort(key=lambda alert: (alert.robot_a, alert.robot_b))
    return alerts


def visit_heatmap(pose_log, grid: GridMap) -> Heatmap:
    """Per-cell visit counts over all robots and ticks.

    Cell assignment is floor(x / cell_size); out-of-bounds poses land in the
    discard tally rather than silently vanishing.
    """
    counts = [[0] * grid.width for _ in range(grid.height)]
    discarded = 0
    for _, _, x, y in pose_log:
        col = math.floor(x / grid.cell_size)
        row = math.floor(y / grid.cell_size)
        if 0 <= col < grid.width and 0 <= row < grid.height:
            counts[row][col] += 1
        else:
            discarded += 1
    return Heatmap(counts, discarded)
