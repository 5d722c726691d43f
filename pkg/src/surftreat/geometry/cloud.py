"""Point-cloud data model.

All coordinates are canonical meters internally; unit conversion happens at
the file boundary only. Clouds are treated as immutable value objects by
every operation in the pipeline (operations return new clouds).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DegenerateInput, InvalidParameter

# Sensor view axis of the scan frame; normals are oriented against it.
VIEW_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass
class CloudMeta:
    source: str = ""
    unit: str = "m"

    def to_dict(self) -> dict:
        return {"source": self.source, "unit": self.unit}


@dataclass
class PointCloud:
    """Ordered 3D points with optional per-point scan-line ids and normals."""

    points: np.ndarray                      # (n, 3) float64, meters
    line_index: np.ndarray | None = None    # (n,) int64, contiguous per line
    normals: np.ndarray | None = None       # (n, 3) unit vectors
    meta: CloudMeta = field(default_factory=CloudMeta)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(self.points)):
            raise InvalidParameter("cloud contains non-finite coordinates")
        if self.line_index is not None:
            self.line_index = np.asarray(self.line_index, dtype=np.int64).ravel()
            if len(self.line_index) != len(self.points):
                raise InvalidParameter("line_index length does not match point count")
            if len(self.line_index) and self.line_index.min() < 0:
                raise InvalidParameter("line ids must be non-negative")
            _check_contiguous_lines(self.line_index)
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
            if len(self.normals) != len(self.points):
                raise InvalidParameter("normals length does not match point count")
            norms = np.linalg.norm(self.normals, axis=1)
            if len(norms) and np.max(np.abs(norms - 1.0)) > 1e-6:
                raise InvalidParameter("normals must be unit length")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def count(self) -> int:
        return len(self.points)

    def lines(self):
        """Yield (line id, index array) per scan line, in storage order."""
        if self.line_index is None:
            return
        ids, starts = np.unique(self.line_index, return_index=True)
        order = np.argsort(starts)
        bounds = list(np.sort(starts)) + [len(self.line_index)]
        for k, pos in enumerate(order):
            lo, hi = bounds[k], bounds[k + 1]
            yield int(ids[pos]), np.arange(lo, hi)

    def select(self, mask_or_ids) -> "PointCloud":
        """Subset cloud preserving order and per-point attributes."""
        return PointCloud(
            points=self.points[mask_or_ids].copy(),
            line_index=None if self.line_index is None else self.line_index[mask_or_ids].copy(),
            normals=None if self.normals is None else self.normals[mask_or_ids].copy(),
            meta=replace(self.meta),
        )


def _check_contiguous_lines(line_index: np.ndarray) -> None:
    # Points of one line must be stored consecutively.
    if len(line_index) == 0:
        return
    change = np.flatnonzero(np.diff(line_index) != 0)
    seen_ids = line_index[np.concatenate(([0], change + 1))]
    if len(np.unique(seen_ids)) != len(seen_ids):
        raise InvalidParameter("line ids are not contiguous per line")


@dataclass
class RigidTransform:
    rotation: np.ndarray     # (3, 3) proper orthonormal
    translation: np.ndarray  # (3,) meters

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).ravel()
        err = np.abs(self.rotation.T @ self.rotation - np.eye(3)).max()
        if err > 1e-9:
            raise InvalidParameter(f"rotation is not orthonormal (deviation {err:.2e})")
        if abs(np.linalg.det(self.rotation) - 1.0) > 1e-9:
            raise InvalidParameter("rotation must be proper (det = +1)")

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self ∘ other: apply ``other`` first."""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)


@dataclass
class Aabb:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        self.min = np.asarray(self.min, dtype=np.float64).ravel()
        self.max = np.asarray(self.max, dtype=np.float64).ravel()
        if np.any(self.min > self.max):
            raise InvalidParameter("Aabb min must be <= max componentwise")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return np.all((pts >= self.min) & (pts <= self.max), axis=1)


@dataclass
class SurfaceFrame:
    """Principal frame of a scanned surface.

    Axes rows are u (largest variance), v (middle) and n (smallest,
    the surface normal, oriented toward the sensor view axis).
    """

    origin: np.ndarray   # (3,) centroid
    axes: np.ndarray     # (3, 3), rows u, v, n
    extents: np.ndarray  # (2,) half-lengths along u, v

    @property
    def u(self) -> np.ndarray:
        return self.axes[0]

    @property
    def v(self) -> np.ndarray:
        return self.axes[1]

    @property
    def n(self) -> np.ndarray:
        return self.axes[2]

    def to_local(self, pts: np.ndarray) -> np.ndarray:
        """World points -> (u, v, n) coordinates."""
        return (np.atleast_2d(pts) - self.origin) @ self.axes.T


def apply_transform(cloud: PointCloud, transform: RigidTransform) -> PointCloud:
    """Rigidly move a cloud; normals are rotated only."""
    out = PointCloud(
        points=transform.apply(cloud.points),
        line_index=None if cloud.line_index is None else cloud.line_index.copy(),
        normals=None if cloud.normals is None else cloud.normals @ transform.rotation.T,
        meta=replace(cloud.meta),
    )
    return out


def crop_box(cloud: PointCloud, box: Aabb) -> PointCloud:
    """Keep exactly the points inside the box, preserving order and line ids."""
    return cloud.select(box.contains(cloud.points))


def voxel_downsample(cloud: PointCloud, leaf: float) -> PointCloud:
    """One centroid per occupied voxel; grid anchored at the cloud min corner.

    Line ids and normals do not survive downsampling.
    """
    if leaf <= 0:
        raise InvalidParameter("voxel leaf size must be > 0")
    if len(cloud) == 0:
        return PointCloud(np.empty((0, 3)), meta=replace(cloud.meta))
    anchor = cloud.points.min(axis=0)
    ids = np.floor((cloud.points - anchor) / leaf).astype(np.int64)
    # Lexicographic voxel keys make the output order deterministic.
    uniq, inverse = np.unique(ids, axis=0, return_inverse=True)
    counts = np.bincount(inverse, minlength=len(uniq)).astype(np.float64)
    sums = np.zeros((len(uniq), 3))
    for axis in range(3):
        sums[:, axis] = np.bincount(inverse, weights=cloud.points[:, axis], minlength=len(uniq))
    return PointCloud(sums / counts[:, None], meta=replace(cloud.meta))


def estimate_rigid_transform(src: np.ndarray, dst: np.ndarray) -> RigidTransform:
    """Closed-form least-squares rigid registration of paired point sets.

    Minimizes sum ||R*src_i + t - dst_i||^2 with a proper rotation
    (reflection corrected by negating the last singular axis).
    """
    src = np.asarray(src, dtype=np.float64).reshape(-1, 3)
    dst = np.asarray(dst, dtype=np.float64).reshape(-1, 3)
    if len(src) != len(dst):
        raise DegenerateInput("source and destination must pair up")
    if len(src) < 3:
        raise DegenerateInput("need at least 3 point pairs")
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    a = src - cs
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[1] <= max(1e-12, 1e-9 * sv[0]):
        raise DegenerateInput("source points are colinear")
    h = a.T @ (dst - cd)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return RigidTransform(rot, cd - rot @ cs)


def pca_frame(cloud: PointCloud) -> SurfaceFrame:
    """Principal frame from the point covariance.

    Sign convention: n points toward +z (sensor view axis); u's largest-
    magnitude component is made positive; v completes a right-handed frame.
    """
    pts = cloud.points
    if len(pts) < 3:
        raise DegenerateInput("need at least 3 points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered / len(pts)
    evals, evecs = np.linalg.eigh(cov)  # ascending
    if evals[1] <= max(1e-24, 1e-12 * evals[2]):
        raise DegenerateInput("points are colinear")
    u_axis = evecs[:, 2]
    n_axis = evecs[:, 0]
    if np.dot(n_axis, VIEW_AXIS) < 0:
        n_axis = -n_axis
    if u_axis[np.argmax(np.abs(u_axis))] < 0:
        u_axis = -u_axis
    v_axis = np.cross(n_axis, u_axis)
    axes = np.vstack([u_axis, v_axis, n_axis])
    proj = centered @ axes.T
    extents = np.abs(proj[:, :2]).max(axis=0)
    return SurfaceFrame(origin=centroid, axes=axes, extents=extents)
