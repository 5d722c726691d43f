"""Immutable spatial index with brute-force-exact query semantics.

A k-d tree does the heavy lifting; candidate distances are then recomputed
with the same formula a brute-force scan would use, so results (including
ties, broken by ascending point id) match an exhaustive scan exactly.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..errors import EmptyCloud, InvalidParameter
from .cloud import PointCloud


def point_distances(points: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Reference Euclidean distance used by queries and oracles alike."""
    return np.linalg.norm(points - query, axis=1)


class SpatialIndex:
    """Snapshot of a cloud supporting exact kNN and radius queries."""

    def __init__(self, cloud: PointCloud):
        if len(cloud) == 0:
            raise EmptyCloud("cannot index an empty cloud")
        self._points = cloud.points.copy()
        self._points.setflags(write=False)
        self._tree = cKDTree(self._points)

    def __len__(self) -> int:
        return len(self._points)

    @property
    def points(self) -> np.ndarray:
        return self._points

    def knn(self, query, k: int) -> list[tuple[int, float]]:
        """min(k, n) nearest ids with distances ascending, ties by lower id."""
        if k < 1:
            raise InvalidParameter("k must be >= 1")
        query = np.asarray(query, dtype=np.float64).ravel()
        n = len(self._points)
        k_eff = min(k, n)
        if k_eff == n:
            cand = np.arange(n)
        else:
            dist, _ = self._tree.query(query, k=k_eff)
            kth = float(np.atleast_1d(dist)[-1])
            # Inflate to be safe against tree/scan rounding differences,
            # then re-rank candidates with the reference metric.
            radius = kth * (1.0 + 1e-9) + 1e-300
            cand = np.asarray(self._tree.query_ball_point(query, radius), dtype=np.int64)
        d = point_distances(self._points[cand], query)
        order = np.lexsort((cand, d))[:k_eff]
        return [(int(cand[i]), float(d[i])) for i in order]

    def radius(self, query, r: float) -> list[tuple[int, float]]:
        """All ids within distance <= r, ascending by (distance, id)."""
        if r < 0:
            raise InvalidParameter("radius must be >= 0")
        query = np.asarray(query, dtype=np.float64).ravel()
        cand = np.asarray(self._tree.query_ball_point(query, r * (1.0 + 1e-9) + 1e-300),
                          dtype=np.int64)
        if len(cand) == 0:
            return []
        d = point_distances(self._points[cand], query)
        keep = d <= r
        cand, d = cand[keep], d[keep]
        order = np.lexsort((cand, d))
        return [(int(cand[i]), float(d[i])) for i in order]

    def nearest_distances(self, queries: np.ndarray) -> np.ndarray:
        """Distance from each query point to its nearest indexed point."""
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        dist, _ = self._tree.query(queries, k=1)
        return np.atleast_1d(dist)

    def nearest_ids(self, queries: np.ndarray) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        _, ids = self._tree.query(queries, k=1)
        return np.atleast_1d(ids)

    def knn_bulk(self, queries: np.ndarray, k: int):
        """(distances, ids) arrays for many queries; tree tie order, no re-rank."""
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        dist, ids = self._tree.query(queries, k=min(k, len(self._points)), workers=-1)
        return np.atleast_2d(dist), np.atleast_2d(ids)


def build_index(cloud: PointCloud) -> SpatialIndex:
    return SpatialIndex(cloud)


def knn(index: SpatialIndex, query, k: int) -> list[tuple[int, float]]:
    return index.knn(query, k)


def radius_query(index: SpatialIndex, query, r: float) -> list[tuple[int, float]]:
    return index.radius(query, r)
