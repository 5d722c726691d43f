"""Wrench types and the hypercube wrench-region error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameter

AXES = ("fx", "fy", "fz", "tx", "ty", "tz")


def as_wrench(values) -> np.ndarray:
    w = np.asarray(values, dtype=np.float64).ravel()
    if w.shape != (6,):
        raise InvalidParameter("a wrench has exactly 6 components")
    if not np.all(np.isfinite(w)):
        raise InvalidParameter("wrench components must be finite")
    return w


@dataclass
class WrenchRegion:
    """Axis-aligned hypercube of allowed wrenches; lo == hi is a setpoint."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = as_wrench(self.lo)
        self.hi = as_wrench(self.hi)
        if np.any(self.lo > self.hi):
            raise InvalidParameter("region lo must be <= hi componentwise")

    @classmethod
    def point(cls, wrench) -> "WrenchRegion":
        w = as_wrench(wrench)
        return cls(w.copy(), w.copy())

    @classmethod
    def force_z(cls, fz: float) -> "WrenchRegion":
        """Point region with fz along z and zero elsewhere (sanding case)."""
        w = np.zeros(6)
        w[2] = fz
        return cls.point(w)

    @property
    def setpoint_z(self) -> float:
        return float((self.lo[2] + self.hi[2]) / 2.0)

    def contains(self, wrench) -> bool:
        w = as_wrench(wrench)
        return bool(np.all(w >= self.lo) & np.all(w <= self.hi))

    def to_dict(self) -> dict:
        return {"lo": [float(x) for x in self.lo], "hi": [float(x) for x in self.hi]}


def wrench_region_error(measured, region: WrenchRegion) -> np.ndarray:
    """Signed per-axis distance from the measurement into the region.

    Zero inside; outside, measured + error is the Euclidean projection of
    the measurement onto the hypercube.
    """
    w = as_wrench(measured)
    return np.clip(w, region.lo, region.hi) - w
