"""Differential-drive kinematics: wheel-speed conversion and exact arc motion."""

from __future__ import annotations

import math
from dataclasses import dataclass

# Executed commands are snapped to this grid (about 1e-6 m/s). With
# power-of-two wheel geometry the wheel-speed conversion then happens in
# integer-scaled arithmetic, so the (v, w) round trip is bit-exact.
COMMAND_QUANTUM = 2.0 ** -20


def wrap_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t <= -math.pi:
        t += 2.0 * math.pi
    elif t > math.pi:
        t -= 2.0 * math.pi
    return t


def quantize_command(x: float) -> float:
    """Snap to the actuator register grid; idempotent."""
    return round(x / COMMAND_QUANTUM) * COMMAND_QUANTUM


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    theta: float  # rad, wrapped to (-pi, pi]

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def to_json_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "theta": self.theta}


@dataclass(frozen=True)
class DiffDriveParams:
    wheel_radius: float  # m
    axle_length: float   # m
    v_max: float         # m/s
    w_max: float         # rad/s

    def __post_init__(self):
        if self.wheel_radius <= 0 or self.axle_length <= 0:
            raise ValueError("wheel_radius and axle_length must be > 0")
        if self.v_max <= 0 or self.w_max <= 0:
            raise ValueError("v_max and w_max must be > 0")


def to_wheel_speeds(v: float, w: float, p: DiffDriveParams) -> tuple[float, float]:
    """(omega_left, omega_right) in rad/s for a body command (v, w)."""
    half = w * (p.axle_length / 2.0)
    return (v - half) / p.wheel_radius, (v + half) / p.wheel_radius


def from_wheel_speeds(omega_left: float, omega_right: float, p: DiffDriveParams) -> tuple[float, float]:
    """Inverse of to_wheel_speeds: body (v, w) from wheel rates."""
    v = p.wheel_radius * (omega_right + omega_left) / 2.0
    w = p.wheel_radius * (omega_right - omega_left) / p.axle_length
    return v, w


def integrate_unicycle(pose: RobotPose, v: float, w: float, dt: float) -> RobotPose:
    """Exact constant-command arc over dt (straight line when w ~ 0)."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if abs(w) < 1e-9:
        return RobotPose(
            pose.x + v * math.cos(pose.theta) * dt,
            pose.y + v * math.sin(pose.theta) * dt,
            pose.theta,
        )
    theta1 = pose.theta + w * dt
    radius = v / w
    return RobotPose(
        pose.x + radius * (math.sin(theta1) - math.sin(pose.theta)),
        pose.y - radius * (math.cos(theta1) - math.cos(pose.theta)),
        theta1,
    )
