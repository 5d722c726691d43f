"""Path/surface alignment metrics and the planarity validity check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoContactWaypoints
from ..geometry.cloud import PointCloud, SurfaceFrame
from ..geometry.index import SpatialIndex
from .path import ToolPath


@dataclass
class AlignmentMetrics:
    rmse: float
    mae: float
    max: float
    n_waypoints: int

    def to_dict(self) -> dict:
        return {"rmse_m": self.rmse, "mae_m": self.mae, "max_m": self.max,
                "n_waypoints": self.n_waypoints}


def alignment_metrics(path: ToolPath, index: SpatialIndex) -> AlignmentMetrics:
    """Distance statistics of contact waypoints to the nearest cloud point.

    Approach, depart and connect waypoints are excluded.
    """
    contact = path.contact_positions()
    if len(contact) == 0:
        raise NoContactWaypoints("path has no contact waypoints")
    d = index.nearest_distances(contact)
    return AlignmentMetrics(rmse=float(np.sqrt(np.mean(d ** 2))),
                            mae=float(np.mean(d)),
                            max=float(np.max(d)),
                            n_waypoints=int(len(contact)))


def check_projectively_planar(cloud: PointCloud, frame: SurfaceFrame, cell: float,
                              max_spread: float):
    """Height-field validity: per (u, v) raster cell, the spread of the
    normal coordinate must stay below ``max_spread``.

    Returns (ok, violating cell coordinates in (u, v)).
    """
    local = frame.to_local(cloud.points)
    cell_ids = np.floor(local[:, :2] / cell).astype(np.int64)
    uniq, inverse = np.unique(cell_ids, axis=0, return_inverse=True)
    n_cells = len(uniq)
    h = local[:, 2]
    hi = np.full(n_cells, -np.inf)
    lo = np.full(n_cells, np.inf)
    np.maximum.at(hi, inverse, h)
    np.minimum.at(lo, inverse, h)
    spread = hi - lo
    bad = spread >= max_spread
    violations = [((float(c[0]) + 0.5) * cell, (float(c[1]) + 0.5) * cell)
                  for c in uniq[bad]]
    return not bad.any(), violations
