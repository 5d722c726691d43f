"""Parallel-plane slicing and cross-section contour extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyBand, InvalidParameter
from ..geometry.cloud import PointCloud, SurfaceFrame


@dataclass
class SlicePlane:
    point: np.ndarray    # a point on the plane
    normal: np.ndarray   # unit normal (the slicing direction)
    offset_u: float      # signed position along the frame u axis


@dataclass
class Contour:
    plane_id: int
    positions: np.ndarray      # (m, 3) ordered waypoint positions
    arc_params: np.ndarray     # (m,) strictly increasing arc length


def define_slicing_planes(frame: SurfaceFrame, stepover: float,
                          band_halfwidth: float = 0.0) -> list[SlicePlane]:
    """Planes normal to the frame u axis covering [-extent_u, +extent_u].

    Uniform spacing ``stepover`` centered on the centroid; the first and
    last plane are inset by half a band so edge contours are not starved.
    """
    if stepover <= 0:
        raise InvalidParameter("stepover must be > 0")
    extent = float(frame.extents[0])
    count = int(np.floor(2.0 * extent / stepover + 1e-9)) + 1
    offsets = (np.arange(count) - (count - 1) / 2.0) * stepover
    if count > 1 and band_halfwidth > 0:
        inset = band_halfwidth / 2.0
        offsets = offsets.copy()
        offsets[0] = min(offsets[0] + inset, offsets[1])
        offsets[-1] = max(offsets[-1] - inset, offsets[-2])
    return [SlicePlane(point=frame.origin + off * frame.u, normal=frame.u.copy(),
                       offset_u=float(off))
            for off in offsets]


def moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window clamps symmetrically near the
    endpoints so a straight polyline is reproduced exactly."""
    if window <= 1 or len(values) <= 2:
        return values.copy()
    half = window // 2
    out = np.empty_like(values)
    n = len(values)
    for i in range(n):
        h = min(half, i, n - 1 - i)
        out[i] = values[i - h:i + h + 1].mean(axis=0)
    return out


def resample_polyline(positions: np.ndarray, spacing: float,
                      interpolation: str = "linear"):
    """Uniformly resample a polyline by arc length.

    The actual spacing is total length / round(length / spacing), so the
    samples are exactly uniform and within ~half a step of the target.
    Spline interpolation needs at least 4 support points; shorter inputs
    fall back to linear.
    """
    seg = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    length = float(s[-1])
    if length <= 0:
        return positions[:1].copy(), np.zeros(1)
    m = max(1, int(round(length / spacing)))
    samples = np.linspace(0.0, length, m + 1)
    out = np.empty((m + 1, 3))
    if interpolation == "spline" and len(positions) >= 4:
        from scipy.interpolate import CubicSpline
        keep = np.concatenate(([True], np.diff(s) > 0))
        spline = CubicSpline(s[keep], positions[keep])
        out[:] = spline(samples)
    else:
        for axis in range(3):
            out[:, axis] = np.interp(samples, s, positions[:, axis])
    return out, samples


def extract_contour(cloud: PointCloud, frame: SurfaceFrame, plane: SlicePlane,
                    plane_id: int, band_halfwidth: float, waypoint_spacing: float,
                    smoothing_window: int, interpolation: str = "linear") -> Contour:
    """Band-select, project, sort, filter, smooth and resample one slice."""
    signed = (cloud.points - plane.point) @ plane.normal
    in_band = np.abs(signed) <= band_halfwidth
    if in_band.sum() < 2:
        raise EmptyBand(f"plane {plane_id} at u={plane.offset_u:+.4f} m has "
                        f"{int(in_band.sum())} points in band")
    pts = cloud.points[in_band] - signed[in_band, None] * plane.normal
    order = np.argsort(pts @ frame.v, kind="stable")
    pts = pts[order]

    # Drop near-duplicates so the smoothing window spans real travel.
    min_gap = waypoint_spacing / 4.0
    keep = [0]
    last = pts[0]
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - last) >= min_gap:
            keep.append(i)
            last = pts[i]
    pts = pts[keep]
    if len(pts) < 2:
        raise EmptyBand(f"plane {plane_id}: band collapses to a single point")

    pts = moving_average(pts, smoothing_window)
    positions, arc = resample_polyline(pts, waypoint_spacing, interpolation)
    return Contour(plane_id=plane_id, positions=positions, arc_params=arc)
