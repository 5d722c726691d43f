"""Meander tool-path planning: slicing, contouring, orientation, metrics."""

from .config import PlannerConfig
from .metrics import AlignmentMetrics, alignment_metrics, check_projectively_planar
from .path import (
    SEGMENT_KINDS,
    ToolPath,
    Waypoint,
    add_approach_depart,
    connect_meander,
    orient_waypoints,
    path_length,
    quaternion_from_axes,
    quaternion_to_matrix,
    rotate_about_axis,
    travel_directions,
)
from .plan import plan_path
from .slicing import Contour, SlicePlane, define_slicing_planes, extract_contour, moving_average, resample_polyline

__all__ = [
    "AlignmentMetrics",
    "Contour",
    "PlannerConfig",
    "SEGMENT_KINDS",
    "SlicePlane",
    "ToolPath",
    "Waypoint",
    "add_approach_depart",
    "alignment_metrics",
    "check_projectively_planar",
    "connect_meander",
    "define_slicing_planes",
    "extract_contour",
    "moving_average",
    "orient_waypoints",
    "path_length",
    "plan_path",
    "quaternion_from_axes",
    "quaternion_to_matrix",
    "resample_polyline",
    "rotate_about_axis",
    "travel_directions",
]
