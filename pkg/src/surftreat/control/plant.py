"""Quasi-static compliant contact plant.

The surface is a height field over the planner frame, built from the
planning cloud. Contact produces a spring-damper normal force; an optional
surface vibration models workpiece resonance, the failure cause the force
limit guards against.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..errors import InvalidParameter
from ..geometry.cloud import PointCloud, SurfaceFrame, pca_frame


@dataclass
class VibrationSpec:
    amplitude: float = 0.0    # m
    frequency: float = 0.0    # Hz
    axis: str = "n"           # surface normal; the only supported axis

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PlantConfig:
    contact_stiffness: float = 2e4     # N/m
    contact_damping: float = 50.0      # N·s/m, penetration rate only
    admittance: float = 2e-5           # m/N: wrench control signal -> offset
    force_limit: float = 100.0         # N, per translational axis
    vibration: VibrationSpec = field(default_factory=VibrationSpec)
    timestep: float = 0.002            # s
    sensor_noise_sigma: float = 0.05   # N, per force axis
    feed_rate: float = 0.05            # m/s along contact segments
    rapid_rate: float = 0.25           # m/s along approach/connect/depart
    offset_limit: float = 0.05         # m, admittance travel bound per axis

    def __post_init__(self):
        if self.contact_stiffness <= 0:
            raise InvalidParameter("contact_stiffness must be > 0")
        if self.timestep <= 0:
            raise InvalidParameter("timestep must be > 0")
        if self.admittance <= 0:
            raise InvalidParameter("admittance must be > 0")
        if self.force_limit <= 0:
            raise InvalidParameter("force_limit must be > 0")
        if self.feed_rate <= 0 or self.rapid_rate <= 0:
            raise InvalidParameter("feed rates must be > 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["vibration"] = self.vibration.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "PlantConfig":
        data = dict(data)
        vib = data.get("vibration")
        if isinstance(vib, dict):
            data["vibration"] = VibrationSpec(**vib)
        return cls(**data)


class SurfaceModel:
    """Height field h(u, v) over a surface frame, with hole/bounds flagging."""

    def __init__(self, cloud: PointCloud, frame: SurfaceFrame | None = None,
                 cell: float = 2e-3):
        self.frame = frame or pca_frame(cloud)
        local = self.frame.to_local(cloud.points)
        u, v, h = local[:, 0], local[:, 1], local[:, 2]
        iu = np.floor((u - u.min()) / cell).astype(np.int64)
        iv = np.floor((v - v.min()) / cell).astype(np.int64)
        nu, nv = iu.max() + 1, iv.max() + 1
        flat = iu * nv + iv
        sums = np.bincount(flat, weights=h, minlength=nu * nv)
        counts = np.bincount(flat, minlength=nu * nv)
        grid = np.full(nu * nv, np.nan)
        occupied = counts > 0
        grid[occupied] = sums[occupied] / counts[occupied]
        grid = grid.reshape(nu, nv)
        self._holes = bool(np.isnan(grid).any())
        if self._holes:
            # Nearest-occupied fill keeps interpolation defined; queries over
            # holes are still flagged via the occupancy grid.
            from scipy.ndimage import distance_transform_edt
            idx = distance_transform_edt(np.isnan(grid), return_distances=False,
                                         return_indices=True)
            grid = grid[tuple(idx)]
        from scipy.ndimage import binary_dilation
        # One cell of grace at the hull: planned paths may overhang the
        # outermost scan row by up to the slicing band halfwidth.
        self._occupied = binary_dilation(occupied.reshape(nu, nv))
        axis_u = u.min() + (np.arange(nu) + 0.5) * cell
        axis_v = v.min() + (np.arange(nv) + 0.5) * cell
        self._interp = RegularGridInterpolator((axis_u, axis_v), grid,
                                               bounds_error=False, fill_value=None)
        self._bounds = (u.min(), u.max(), v.min(), v.max())
        self._cell = cell

    def height(self, u: float, v: float) -> tuple[float, bool]:
        """Height along the frame normal at (u, v) plus an inside-surface flag.

        A one-cell margin beyond the scanned hull still counts as inside
        (the tool has area; a hair of overhang keeps contact). Interior
        holes stay flagged.
        """
        lo_u, hi_u, lo_v, hi_v = self._bounds
        m = self._cell
        inside = (lo_u - m) <= u <= (hi_u + m) and (lo_v - m) <= v <= (hi_v + m)
        if inside:
            iu = int(np.clip((u - lo_u) / self._cell, 0, self._occupied.shape[0] - 1))
            iv = int(np.clip((v - lo_v) / self._cell, 0, self._occupied.shape[1] - 1))
            inside = bool(self._occupied[iu, iv])
        return float(self._interp((u, v))), inside


def contact_force(penetration: float, penetration_rate: float,
                  plant: PlantConfig) -> float:
    """Normal force magnitude: k_c * delta + c_d * max(0, delta_dot).

    Zero out of contact; the damper never pulls (no sticking).
    """
    if penetration <= 0.0:
        return 0.0
    return (plant.contact_stiffness * penetration
            + plant.contact_damping * max(0.0, penetration_rate))
