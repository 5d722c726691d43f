"""Defect-detection configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import InvalidParameter


@dataclass
class PerceptionConfig:
    poly_degree: int = 1
    residual_threshold_abs: float = 3e-4   # m
    robust_iterations: int = 3
    sor_k: int = 16
    sor_multiplier: float = 2.0
    cluster_radius: float = 5e-3           # m
    cluster_min_points: int = 10
    sor_first: bool = True                 # run SOR before per-line regression

    def __post_init__(self):
        if self.poly_degree < 1 or self.poly_degree > 3:
            raise InvalidParameter("poly_degree must be in [1, 3]")
        if self.residual_threshold_abs <= 0:
            raise InvalidParameter("residual_threshold_abs must be > 0")
        if self.robust_iterations < 1:
            raise InvalidParameter("robust_iterations must be >= 1")
        if self.sor_k < 3:
            raise InvalidParameter("sor_k must be >= 3")
        if self.sor_multiplier <= 0:
            raise InvalidParameter("sor_multiplier must be > 0")
        if self.cluster_radius <= 0:
            raise InvalidParameter("cluster_radius must be > 0")
        if self.cluster_min_points < 1:
            raise InvalidParameter("cluster_min_points must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PerceptionConfig":
        return cls(**data)
