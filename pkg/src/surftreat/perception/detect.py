"""Defect detection pipeline: SOR + per-line regression + clustering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..geometry.cloud import Aabb, PointCloud
from ..geometry.features import mean_point_spacing
from .config import PerceptionConfig
from .linefit import regression_candidates
from .sor import statistical_outlier_removal

KINDS = ("dent", "bump", "rough")


@dataclass
class DefectRegion:
    point_ids: np.ndarray        # ids into the original cloud
    centroid: np.ndarray
    bbox: Aabb
    peak_deviation: float        # signed; + bump, - dent
    area: float                  # count * mean spacing^2
    kind: str

    def to_dict(self) -> dict:
        return {"point_ids": [int(i) for i in self.point_ids],
                "centroid_m": [float(x) for x in self.centroid],
                "bbox_min_m": [float(x) for x in self.bbox.min],
                "bbox_max_m": [float(x) for x in self.bbox.max],
                "peak_deviation_m": float(self.peak_deviation),
                "area_m2": float(self.area),
                "kind": self.kind}


@dataclass
class DefectReport:
    regions: list[DefectRegion]
    candidate_ids: np.ndarray    # regression-flagged point ids (original cloud)
    sor_removed: np.ndarray      # ids removed by the statistical filter
    skipped_lines: list[int]
    config: PerceptionConfig
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"regions": [r.to_dict() for r in self.regions],
                "candidates": [int(i) for i in self.candidate_ids],
                "sor_removed": [int(i) for i in self.sor_removed],
                "skipped_lines": list(self.skipped_lines),
                "config": self.config.to_dict(),
                "counts": dict(self.counts)}


def cluster_by_radius(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Connected components of the radius graph, in first-member order."""
    n = len(points)
    if n == 0:
        return []
    tree = cKDTree(points)
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in tree.query_pairs(radius):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots: dict[int, list[int]] = {}
    for i in range(n):
        roots.setdefault(find(i), []).append(i)
    return [np.asarray(v) for _, v in sorted(roots.items())]


def classify_kind(residuals: np.ndarray) -> tuple[str, float]:
    """Kind plus signed peak from a cluster's residuals.

    Mixed-sign clusters without a dominant peak (|peak+| vs |peak-| ratio
    below 2) are rough areas; otherwise the sign of the peak decides.
    """
    peak_pos = float(residuals.max())
    peak_neg = float(residuals.min())
    peak = peak_pos if abs(peak_pos) >= abs(peak_neg) else peak_neg
    if peak_pos > 0 > peak_neg:
        hi, lo = max(abs(peak_pos), abs(peak_neg)), min(abs(peak_pos), abs(peak_neg))
        if lo > 0 and hi / lo < 2.0:
            return "rough", peak
    return ("bump", peak) if peak > 0 else ("dent", peak)


def detect_defects(cloud: PointCloud, cfg: PerceptionConfig | None = None) -> DefectReport:
    """Full detection pass over a scan.

    Statistical outliers are deleted from the working cloud first (order
    configurable), regression candidates are found per scan line in the
    cleaned cloud, then clustered into typed regions. All reported ids
    refer to the original cloud.
    """
    cfg = cfg or PerceptionConfig()
    orig_ids = np.arange(len(cloud))

    if cfg.sor_first:
        _, sor_out = statistical_outlier_removal(cloud, cfg.sor_k, cfg.sor_multiplier)
        keep = np.setdiff1d(orig_ids, sor_out, assume_unique=True)
        working = cloud.select(keep)
        mask, residuals, skipped = regression_candidates(working, cfg)
    else:
        mask, residuals, skipped = regression_candidates(cloud, cfg)
        _, sor_out = statistical_outlier_removal(cloud, cfg.sor_k, cfg.sor_multiplier)
        keep = np.setdiff1d(orig_ids, sor_out, assume_unique=True)
        keep_mask = np.zeros(len(cloud), dtype=bool)
        keep_mask[keep] = True
        mask = mask & keep_mask
        mask = mask[keep]
        residuals = residuals[keep]
        working = cloud.select(keep)

    cand_local = np.flatnonzero(mask)
    spacing = mean_point_spacing(working) if len(working) > 1 else 0.0

    regions: list[DefectRegion] = []
    if len(cand_local):
        clusters = cluster_by_radius(working.points[cand_local], cfg.cluster_radius)
        for cluster in clusters:
            if len(cluster) < cfg.cluster_min_points:
                continue
            local = cand_local[cluster]
            pts = working.points[local]
            res = residuals[local]
            kind, peak = classify_kind(res)
            regions.append(DefectRegion(
                point_ids=keep[local],
                centroid=pts.mean(axis=0),
                bbox=Aabb(pts.min(axis=0), pts.max(axis=0)),
                peak_deviation=peak,
                area=len(cluster) * spacing ** 2,
                kind=kind))

    report = DefectReport(
        regions=regions,
        candidate_ids=keep[cand_local],
        sor_removed=np.asarray(sor_out, dtype=np.int64),
        skipped_lines=skipped,
        config=cfg,
        counts={"points": len(cloud),
                "sor_removed": int(len(sor_out)),
                "candidates": int(len(cand_local)),
                "regions": len(regions)})
    return report
