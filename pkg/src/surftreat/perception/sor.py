"""Statistical outlier removal (mean-kNN-distance filter)."""

from __future__ import annotations

import numpy as np

from ..errors import InsufficientPoints
from ..geometry.cloud import PointCloud
from ..geometry.index import SpatialIndex


def mean_knn_distances(cloud: PointCloud, k: int) -> np.ndarray:
    """Mean distance from each point to its k nearest other points.

    Distances are recomputed with the reference metric after the tree
    lookup so results match a brute-force scan bit for bit (ties at the
    k-th rank carry equal distances and cannot change the mean).
    """
    n = len(cloud)
    if n <= k:
        raise InsufficientPoints(f"need more than k={k} points, have {n}")
    index = SpatialIndex(cloud)
    k_query = min(k + 2, n)
    _, ids = index.knn_bulk(cloud.points, k_query)
    neighbors = cloud.points[ids]                       # (n, k_query, 3)
    d = np.linalg.norm(neighbors - cloud.points[:, None, :], axis=2)
    d[ids == np.arange(n)[:, None]] = np.inf            # exclude the point itself
    d.sort(axis=1)
    return d[:, :k].mean(axis=1)


def statistical_outlier_removal(cloud: PointCloud, k: int, multiplier: float):
    """Split point ids into (inliers, outliers).

    A point is an outlier iff its mean distance to its k nearest neighbors
    exceeds the population mean by more than ``multiplier`` population
    standard deviations.
    """
    d = mean_knn_distances(cloud, k)
    threshold = d.mean() + multiplier * d.std()
    outlier = d > threshold
    ids = np.arange(len(cloud))
    return ids[~outlier], ids[outlier]
