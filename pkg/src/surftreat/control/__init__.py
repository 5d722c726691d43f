"""Hybrid force-position control against a compliant contact plant."""

from .pid import PidGains, PidState, pid_step
from .plant import PlantConfig, SurfaceModel, VibrationSpec, contact_force
from .sim import (
    CSV_COLUMNS,
    ControlMetrics,
    Trajectory,
    control_metrics,
    simulate_execution,
    tune_gains_default,
)
from .wrench import AXES, WrenchRegion, as_wrench, wrench_region_error

__all__ = [
    "AXES",
    "CSV_COLUMNS",
    "ControlMetrics",
    "PidGains",
    "PidState",
    "PlantConfig",
    "SurfaceModel",
    "Trajectory",
    "VibrationSpec",
    "WrenchRegion",
    "as_wrench",
    "contact_force",
    "control_metrics",
    "pid_step",
    "simulate_execution",
    "tune_gains_default",
    "wrench_region_error",
]
