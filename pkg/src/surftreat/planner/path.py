"""Meander connection, tool orientation and path assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MissingNormals, NoContours
from ..geometry.cloud import PointCloud, SurfaceFrame
from ..geometry.index import SpatialIndex
from .config import PlannerConfig
from .slicing import Contour, resample_polyline

SEGMENT_KINDS = ("approach", "contact", "connect", "depart")


@dataclass
class Waypoint:
    position: np.ndarray
    orientation: np.ndarray   # unit quaternion, wxyz
    travel: np.ndarray        # unit travel direction
    kind: str

    def to_dict(self) -> dict:
        return {"position_m": [float(x) for x in self.position],
                "quaternion_wxyz": [float(x) for x in self.orientation],
                "travel": [float(x) for x in self.travel],
                "kind": self.kind}


@dataclass
class ToolPath:
    waypoints: list[Waypoint]
    config: PlannerConfig
    source_cloud: str = ""
    total_length: float = 0.0
    skipped_planes: list[int] = field(default_factory=list)

    def positions(self) -> np.ndarray:
        return np.asarray([w.position for w in self.waypoints])

    def kinds(self) -> list[str]:
        return [w.kind for w in self.waypoints]

    def contact_positions(self) -> np.ndarray:
        return np.asarray([w.position for w in self.waypoints if w.kind == "contact"])

    def length_of(self, kinds: tuple[str, ...]) -> float:
        """Polyline length over segments whose destination kind is listed."""
        pos = self.positions()
        total = 0.0
        for i in range(1, len(pos)):
            if self.waypoints[i].kind in kinds:
                total += float(np.linalg.norm(pos[i] - pos[i - 1]))
        return total

    def to_dict(self) -> dict:
        return {"waypoints": [w.to_dict() for w in self.waypoints],
                "config": self.config.to_dict(),
                "source_cloud": self.source_cloud,
                "total_length_m": float(self.total_length),
                "skipped_planes": list(self.skipped_planes)}


def connect_meander(contours: list[Contour], waypoint_spacing: float):
    """Serpentine traversal: even contours forward, odd reversed.

    Returns (positions, kinds); straight connect segments sampled at the
    waypoint spacing join consecutive contour endpoints.
    """
    contours = [c for c in contours if len(c.positions) > 0]
    if not contours:
        raise NoContours("no non-empty contours to connect")
    positions: list[np.ndarray] = []
    kinds: list[str] = []
    for i, contour in enumerate(contours):
        pts = contour.positions if i % 2 == 0 else contour.positions[::-1]
        if positions:
            prev_end = positions[-1]
            connect, _ = resample_polyline(np.vstack([prev_end, pts[0]]), waypoint_spacing)
            for p in connect[1:-1]:
                positions.append(p)
                kinds.append("connect")
        for p in pts:
            if positions and np.array_equal(positions[-1], p):
                continue  # degenerate touching contours
            positions.append(p)
            kinds.append("contact")
    return np.asarray(positions), kinds


def quaternion_from_axes(x_axis: np.ndarray, y_axis: np.ndarray, z_axis: np.ndarray) -> np.ndarray:
    """wxyz quaternion of the rotation with the given column axes.

    Sign canonicalized (w >= 0, then first nonzero component positive) so
    identical frames always serialize identically.
    """
    m = np.column_stack([x_axis, y_axis, z_axis])
    tr = np.trace(m)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s])
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array([(m[2, 1] - m[1, 2]) / s,
                      0.25 * s,
                      (m[0, 1] + m[1, 0]) / s,
                      (m[0, 2] + m[2, 0]) / s])
    elif m[1, 1] >= m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array([(m[0, 2] - m[2, 0]) / s,
                      (m[0, 1] + m[1, 0]) / s,
                      0.25 * s,
                      (m[1, 2] + m[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array([(m[1, 0] - m[0, 1]) / s,
                      (m[0, 2] + m[2, 0]) / s,
                      (m[1, 2] + m[2, 1]) / s,
                      0.25 * s])
    q /= np.linalg.norm(q)
    nz = np.flatnonzero(np.abs(q) > 1e-12)
    if len(nz) and q[nz[0]] < 0:
        q = -q
    return q


def quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotate_about_axis(vec: np.ndarray, axis: np.ndarray, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation of ``vec`` about a unit ``axis``."""
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return vec * c + np.cross(axis, vec) * s + axis * np.dot(axis, vec) * (1 - c)


def travel_directions(positions: np.ndarray, kinds: list[str] | None = None) -> np.ndarray:
    """Per-point unit travel direction from finite differences.

    When kinds are given, differences never cross a segment-kind boundary:
    the last waypoint of a contour keeps the contour's direction instead of
    turning into the connect hop (keeps tool orientation continuous).
    """
    n = len(positions)
    out = np.zeros((n, 3))
    if n == 1:
        out[0] = [1.0, 0.0, 0.0]
        return out
    runs: list[tuple[int, int]] = []
    if kinds is None:
        runs.append((0, n))
    else:
        start = 0
        for i in range(1, n + 1):
            if i == n or kinds[i] != kinds[start]:
                runs.append((start, i))
                start = i
    for lo, hi in runs:
        if hi - lo == 1:
            ref = positions[min(hi, n - 1)] - positions[max(lo - 1, 0)]
            out[lo] = ref
            continue
        diffs = np.diff(positions[lo:hi], axis=0)
        out[lo:hi - 1] = diffs
        out[hi - 1] = diffs[-1]
    norms = np.linalg.norm(out, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return out / norms


def orient_waypoints(positions: np.ndarray, kinds: list[str], cloud: PointCloud,
                     angle_of_attack_deg: float, index: SpatialIndex | None = None) -> list[Waypoint]:
    """Build oriented waypoints from positions and the cloud's normals.

    The tool z-axis is the nearest surface normal tilted by the angle of
    attack about the travel direction, then negated (tool points into the
    surface); the x-axis is the travel direction orthogonalized against z.
    """
    if cloud.normals is None:
        raise MissingNormals("cloud has no normals; run estimate_normals first")
    if index is None:
        index = SpatialIndex(cloud)
    nearest = index.nearest_ids(positions)
    normals = cloud.normals[nearest]
    travels = travel_directions(positions, kinds)
    alpha = np.deg2rad(angle_of_attack_deg)
    waypoints: list[Waypoint] = []
    for pos, kind, normal, travel in zip(positions, kinds, normals, travels):
        tilted = rotate_about_axis(normal, travel, alpha) if alpha != 0.0 else normal
        z_axis = -tilted / np.linalg.norm(tilted)
        x_axis = travel - np.dot(travel, z_axis) * z_axis
        nx = np.linalg.norm(x_axis)
        if nx < 1e-12:
            # Travel parallel to the tool axis; pick any orthogonal x.
            ref = np.array([1.0, 0.0, 0.0]) if abs(z_axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
            x_axis = ref - np.dot(ref, z_axis) * z_axis
            nx = np.linalg.norm(x_axis)
        x_axis /= nx
        y_axis = np.cross(z_axis, x_axis)
        waypoints.append(Waypoint(position=np.asarray(pos, dtype=np.float64),
                                  orientation=quaternion_from_axes(x_axis, y_axis, z_axis),
                                  travel=travel,
                                  kind=kind))
    return waypoints


def add_approach_depart(waypoints: list[Waypoint], clearance: float,
                        waypoint_spacing: float) -> list[Waypoint]:
    """Prepend a straight approach and append a symmetric depart.

    Both run along the local tool -z direction (away from the surface) from
    a clearance offset, sampled at the waypoint spacing.
    """
    if not waypoints:
        raise NoContours("cannot add approach to an empty path")

    def ray(wp: Waypoint, kind: str, reverse: bool) -> list[Waypoint]:
        z_axis = quaternion_to_matrix(wp.orientation)[:, 2]
        start = wp.position - clearance * z_axis  # -z is away from the surface
        line, _ = resample_polyline(np.vstack([start, wp.position]), waypoint_spacing)
        pts = line[:-1] if not reverse else line[::-1][1:]
        travel = (wp.position - start) if not reverse else (start - wp.position)
        travel = travel / np.linalg.norm(travel)
        return [Waypoint(position=p, orientation=wp.orientation.copy(),
                         travel=travel.copy(), kind=kind) for p in pts]

    out = ray(waypoints[0], "approach", reverse=False) + list(waypoints)
    out += ray(waypoints[-1], "depart", reverse=True)
    return out


def path_length(waypoints: list[Waypoint]) -> float:
    pos = np.asarray([w.position for w in waypoints])
    if len(pos) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pos, axis=0), axis=1).sum())
