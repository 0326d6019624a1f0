"""Kinematic multi-robot scenario engine with JSON frame logging."""

from .diff_drive import (
    COMMAND_QUANTUM,
    DiffDriveParams,
    RobotPose,
    from_wheel_speeds,
    integrate_unicycle,
    quantize_command,
    to_wheel_speeds,
    wrap_angle,
)
from .harness import (
    PHASES,
    Simulation,
    check_log_invariants,
    log_frame,
    read_run_log,
    simulate,
    validate_trace,
    write_run_log,
)
from .scenario import (
    RobotSpec,
    Scenario,
    Thresholds,
    default_scenario,
    default_scenario_path,
    load_scenario,
    scenario_from_dict,
)
from .stacking import BinSpec, Orientation, Placement, Side, plan_stack

__all__ = [
    "COMMAND_QUANTUM",
    "DiffDriveParams",
    "RobotPose",
    "from_wheel_speeds",
    "integrate_unicycle",
    "quantize_command",
    "to_wheel_speeds",
    "wrap_angle",
    "PHASES",
    "Simulation",
    "check_log_invariants",
    "log_frame",
    "read_run_log",
    "simulate",
    "validate_trace",
    "write_run_log",
    "RobotSpec",
    "Scenario",
    "Thresholds",
    "default_scenario",
    "default_scenario_path",
    "load_scenario",
    "scenario_from_dict",
    "BinSpec",
    "Orientation",
    "Placement",
    "Side",
    "plan_stack",
]
