"""Synthetic laser-scan generator with seeded ground truth.

Replaces physical scanning: emits a grid-sampled surface (plane or
cylinder patch) with per-row scan lines, Gaussian depth noise and seeded
bump/dent defects, plus the ground-truth defect list for benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParameter
from ..geometry.cloud import CloudMeta, PointCloud

SURFACE_KINDS = ("plane", "cylinder-patch")


@dataclass
class DefectSpec:
    center: tuple[float, float]   # (u, v) surface coordinates, meters
    radius: float                 # footprint radius, meters
    depth: float                  # peak offset along the normal; <0 dent, >0 bump

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius, "depth": self.depth}

    @property
    def kind(self) -> str:
        return "dent" if self.depth < 0 else "bump"


@dataclass
class ScanSpec:
    surface: str = "plane"
    size: tuple[float, float] = (0.1, 0.1)   # extent along (u, v), meters
    spacing: float = 1e-3
    noise_sigma: float = 0.0
    radius: float = 2.0                      # cylinder radius, meters
    defects: list[DefectSpec] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.surface not in SURFACE_KINDS:
            raise InvalidParameter(f"unknown surface kind {self.surface!r}")
        if self.spacing <= 0:
            raise InvalidParameter("spacing must be > 0")
        if self.size[0] <= 0 or self.size[1] <= 0:
            raise InvalidParameter("size must be positive")
        if self.surface == "cylinder-patch" and self.radius <= self.size[1] / 2:
            raise InvalidParameter("cylinder radius must exceed half the patch width")
        for d in self.defects:
            if d.radius <= self.spacing:
                raise InvalidParameter("defect radius must exceed point spacing")

    def to_dict(self) -> dict:
        return {"surface": self.surface, "size": list(self.size), "spacing": self.spacing,
                "noise_sigma": self.noise_sigma, "radius": self.radius,
                "defects": [d.to_dict() for d in self.defects], "seed": self.seed}

    @classmethod
    def from_dict(cls, data: dict) -> "ScanSpec":
        data = dict(data)
        data["defects"] = [DefectSpec(center=tuple(d["center"]), radius=d["radius"],
                                      depth=d["depth"]) for d in data.get("defects", [])]
        if "size" in data:
            data["size"] = tuple(data["size"])
        return cls(**data)


def defect_profile(r: np.ndarray, radius: float, depth: float) -> np.ndarray:
    """Gaussian bump/dent: depth * exp(-r^2 / (2 (radius/2)^2))."""
    sigma = radius / 2.0
    return depth * np.exp(-(r ** 2) / (2.0 * sigma ** 2))


def make_synthetic_scan(spec: ScanSpec):
    """Deterministic scan for a given spec; returns (cloud, ground truth list).

    Rows of constant u are the scan lines (one laser sweep per row); noise
    and defect profiles displace points along the local surface normal.
    """
    su, sv = spec.size
    u = np.arange(np.round(su / spec.spacing) + 1) * spec.spacing - su / 2.0
    v = np.arange(np.round(sv / spec.spacing) + 1) * spec.spacing - sv / 2.0
    uu, vv = np.meshgrid(u, v, indexing="ij")       # row-major: constant-u rows
    uu = uu.ravel()
    vv = vv.ravel()
    line_index = np.repeat(np.arange(len(u)), len(v))

    if spec.surface == "plane":
        zz = np.zeros_like(uu)
        normals = np.tile([0.0, 0.0, 1.0], (len(uu), 1))
    else:
        # Concave valley: cylinder axis along u, curvature across v.
        zz = spec.radius - np.sqrt(spec.radius ** 2 - vv ** 2)
        slope = vv / np.sqrt(spec.radius ** 2 - vv ** 2)
        normals = np.stack([np.zeros_like(vv), -slope, np.ones_like(vv)], axis=1)
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)

    offset = np.zeros_like(zz)
    rng = np.random.default_rng(spec.seed)
    if spec.noise_sigma > 0:
        offset += rng.normal(0.0, spec.noise_sigma, size=len(uu))
    for d in spec.defects:
        r = np.hypot(uu - d.center[0], vv - d.center[1])
        offset += defect_profile(r, d.radius, d.depth)

    points = np.stack([uu, vv, zz], axis=1) + offset[:, None] * normals
    cloud = PointCloud(points, line_index=line_index,
                       meta=CloudMeta(source=f"synthetic:{spec.surface}", unit="m"))
    return cloud, list(spec.defects)
