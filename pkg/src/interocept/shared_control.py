"""Average-pooling convergence of human increments with autonomous commands.

The human channel is rebuilt each tick as the autonomous command plus the
summed increments, clamped to actuator limits; the executed command is the
midpoint of the two channels, clamped again. The deviation between executed
and autonomous commands, normalized by v_max, is logged as dissonance,
parameterized by the intensity of human input on that tick.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

from .errors import TickMismatch


class InputSource(Enum):
    KEYBOARD = "keyboard"
    GAMEPAD = "gamepad"
    API = "api"


@dataclass(frozen=True)
class AutonomousCommand:
    v: float    # m/s, >= 0
    w: float    # rad/s
    tick: int


@dataclass(frozen=True)
class HumanIncrement:
    dv: float
    dw: float
    tick: int
    source: InputSource = InputSource.API


@dataclass(frozen=True)
class FusedCommand:
    v: float
    w: float
    tick: int


@dataclass(frozen=True)
class DissonanceRecord:
    tick: int
    intensity: float    # summed |increment| magnitude, m/s equivalent
    dissonance: float   # normalized command deviation in [0, 1]
    station_m: float    # arc-length position along the active path

    def to_json_dict(self) -> dict:
        return {
            "tick": self.tick,
            "intensity": self.intensity,
            "dissonance": self.dissonance,
            "station_m": self.station_m,
        }


@dataclass(frozen=True)
class Limits:
    """Actuator bounds plus per-event input scaling clamps."""

    v_max: float
    w_max: float
    dv_max: float = math.inf
    dw_max: float = math.inf

    def clamp_increment(self, inc: HumanIncrement) -> HumanIncrement:
        dv = min(self.dv_max, max(-self.dv_max, inc.dv))
        dw = min(self.dw_max, max(-self.dw_max, inc.dw))
        if dv == inc.dv and dw == inc.dw:
            return inc
        return HumanIncrement(dv, dw, inc.tick, inc.source)

    def clamp_v(self, v: float) -> float:
        return min(self.v_max, max(0.0, v))

    def clamp_w(self, w: float) -> float:
        return min(self.w_max, max(-self.w_max, w))


def fuse(auto: AutonomousCommand, increments, limits: Limits) -> FusedCommand:
    """Average-pool the human channel with the autonomous command.

    Clamp order is clamp-then-average-then-clamp, so a burst of increments
    can never push the executed command outside actuator limits.
    """
    for inc in increments:
        if inc.tick != auto.tick:
            raise TickMismatch(f"increment tick {inc.tick} != command tick {auto.tick}")
    if not increments:
        return FusedCommand(auto.v, auto.w, auto.tick)
    h_v = limits.clamp_v(auto.v + sum(i.dv for i in increments))
    h_w = limits.clamp_w(auto.w + sum(i.dw for i in increments))
    return FusedCommand(
        limits.clamp_v((auto.v + h_v) / 2.0),
        limits.clamp_w((auto.w + h_w) / 2.0),
        auto.tick,
    )


def record_dissonance(
    auto: AutonomousCommand,
    fused: FusedCommand,
    increments,
    station_m: float,
    limits: Limits,
) -> DissonanceRecord:
    """Log normalized deviation between executed and autonomous commands.

    Angular terms are folded into linear units via v_max/w_max so one scalar
    covers both axes; the result saturates at 1.
    """
    scale = limits.v_max / limits.w_max
    intensity = sum(abs(i.dv) for i in increments) + scale * sum(abs(i.dw) for i in increments)
    deviation = abs(fused.v - auto.v) + scale * abs(fused.w - auto.w)
    dissonance = min(1.0, deviation / limits.v_max)
    return DissonanceRecord(auto.tick, intensity, dissonance, station_m)


def dissonance_field(records, time_bins: int, station_bins: int) -> list[list[float]]:
    """Mean dissonance bucketed over (tick, station) into a fixed-size grid.

    Bucket spans cover the observed tick and station ranges; a degenerate
    span maps everything to bin 0. Empty buckets read 0.
    """
    if time_bins < 1 or station_bins < 1:
        raise ValueError("bins must be >= 1")
    sums = [[0.0] * station_bins for _ in range(time_bins)]
    counts = [[0] * station_bins for _ in range(time_bins)]
    if records:
        t_lo = min(r.tick for r in records)
        t_span = max(r.tick for r in records) - t_lo
        s_lo = min(r.station_m for r in records)
        s_span = max(r.station_m for r in records) - s_lo

        def bucket(value, lo, span, bins):
            if span == 0:
                return 0
            return min(bins - 1, int((value - lo) / span * bins))

        for r in records:
            ti = bucket(r.tick, t_lo, t_span, time_bins)
            si = bucket(r.station_m, s_lo, s_span, station_bins)
            sums[ti][si] += r.dissonance
            counts[ti][si] += 1
    return [
        [sums[t][s] / counts[t][s] if counts[t][s] else 0.0 for s in range(station_bins)]
        for t in range(time_bins)
    ]


def write_dissonance_trace(records, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json_dict()) + "\n")


def field_to_json_dict(grid: list[list[float]]) -> dict:
    return {
        "time_bins": len(grid),
        "station_bins": len(grid[0]) if grid else 0,
        "values": [v for row in grid for v in row],
    }
