"""End-to-end meander planning over a scanned surface."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyBand, NoContours, NotProjectivelyPlanar
from ..geometry.cloud import PointCloud, pca_frame
from ..geometry.features import estimate_normals, median_point_spacing
from ..geometry.index import SpatialIndex
from .config import PlannerConfig
from .metrics import AlignmentMetrics, alignment_metrics, check_projectively_planar
from .path import ToolPath, add_approach_depart, connect_meander, orient_waypoints, path_length
from .slicing import Contour, define_slicing_planes, extract_contour


def plan_path(cloud: PointCloud, cfg: PlannerConfig | None = None):
    """Plan a surface-conforming meander path; returns (ToolPath, metrics).

    Slices the cloud with parallel planes from its principal frame,
    extracts and connects cross-section contours, orients the tool with
    the configured angle of attack and wraps the path with approach and
    depart motions. Deterministic for a fixed cloud and config.
    """
    cfg = cfg or PlannerConfig()
    band = cfg.band_halfwidth
    if band is None:
        band = 1.5 * median_point_spacing(cloud)

    frame = pca_frame(cloud)
    ok, violations = check_projectively_planar(cloud, frame, cfg.planarity_cell,
                                               max_spread=4.0 * band)
    if not ok:
        raise NotProjectivelyPlanar(
            f"surface is not a height field over its principal plane "
            f"({len(violations)} violating cells)")

    if cloud.normals is None:
        cloud = estimate_normals(cloud, cfg.normal_k)
    index = SpatialIndex(cloud)

    planes = define_slicing_planes(frame, cfg.stepover, band)
    contours: list[Contour] = []
    skipped: list[int] = []
    for i, plane in enumerate(planes):
        try:
            contours.append(extract_contour(cloud, frame, plane, i, band,
                                            cfg.waypoint_spacing, cfg.smoothing_window,
                                            cfg.interpolation))
        except EmptyBand:
            skipped.append(i)
    if not contours:
        raise NoContours("no slicing plane produced a contour")

    positions, kinds = connect_meander(contours, cfg.waypoint_spacing)
    waypoints = orient_waypoints(positions, kinds, cloud, cfg.angle_of_attack_deg, index)
    waypoints = add_approach_depart(waypoints, cfg.clearance, cfg.waypoint_spacing)

    path = ToolPath(waypoints=waypoints, config=cfg,
                    source_cloud=cloud.meta.source,
                    total_length=path_length(waypoints),
                    skipped_planes=skipped)
    metrics = alignment_metrics(path, index)
    return path, metrics
