"""Per-point normal estimation."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..errors import InsufficientPoints, InvalidParameter
from .cloud import VIEW_AXIS, PointCloud
from .index import SpatialIndex


def estimate_normals(cloud: PointCloud, k: int = 16, view_axis=None) -> PointCloud:
    """Normals from the local covariance of each point's k nearest neighbors.

    The neighborhood is the point itself plus its k nearest neighbors; the
    smallest-eigenvector of its covariance is the normal, sign-oriented
    against the sensor view axis (+z unless overridden).
    """
    if k < 3:
        raise InvalidParameter("k must be >= 3")
    n = len(cloud)
    if n < k + 1:
        raise InsufficientPoints(f"need at least k+1={k + 1} points, have {n}")
    view = VIEW_AXIS if view_axis is None else np.asarray(view_axis, dtype=np.float64)
    index = SpatialIndex(cloud)
    _, ids = index.knn_bulk(cloud.points, k + 1)
    nbrs = cloud.points[ids]                       # (n, k+1, 3)
    centered = nbrs - nbrs.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / (k + 1)
    _, evecs = np.linalg.eigh(cov)                 # ascending eigenvalues
    normals = evecs[:, :, 0]
    flip = (normals @ view) < 0
    normals[flip] = -normals[flip]
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return PointCloud(cloud.points.copy(),
                      line_index=None if cloud.line_index is None else cloud.line_index.copy(),
                      normals=normals,
                      meta=replace(cloud.meta))


def median_point_spacing(cloud: PointCloud, sample: int = 2000, seed: int = 0) -> float:
    """Median nearest-neighbor distance, optionally on a random sample."""
    n = len(cloud)
    if n < 2:
        raise InsufficientPoints("need at least 2 points")
    index = SpatialIndex(cloud)
    if n > sample:
        rng = np.random.default_rng(seed)
        queries = cloud.points[rng.choice(n, size=sample, replace=False)]
    else:
        queries = cloud.points
    dist, _ = index.knn_bulk(queries, 2)
    return float(np.median(dist[:, 1]))


def mean_point_spacing(cloud: PointCloud) -> float:
    """Mean nearest-neighbor distance over all points."""
    if len(cloud) < 2:
        raise InsufficientPoints("need at least 2 points")
    index = SpatialIndex(cloud)
    dist, _ = index.knn_bulk(cloud.points, 2)
    return float(np.mean(dist[:, 1]))
