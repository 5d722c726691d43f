"""Defect detection: line regression, statistical outlier filter, clustering."""

from .config import PerceptionConfig
from .detect import DefectRegion, DefectReport, classify_kind, cluster_by_radius, detect_defects
from .linefit import LineFit, fit_line_robust, line_arc_parameter, regression_candidates
from .sor import mean_knn_distances, statistical_outlier_removal
from .synthetic import DefectSpec, ScanSpec, defect_profile, make_synthetic_scan

__all__ = [
    "DefectRegion",
    "DefectReport",
    "DefectSpec",
    "LineFit",
    "PerceptionConfig",
    "ScanSpec",
    "classify_kind",
    "cluster_by_radius",
    "defect_profile",
    "detect_defects",
    "fit_line_robust",
    "line_arc_parameter",
    "make_synthetic_scan",
    "mean_knn_distances",
    "regression_candidates",
    "statistical_outlier_removal",
]
