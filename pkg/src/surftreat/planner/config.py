"""Path-planner configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import InvalidParameter


@dataclass
class PlannerConfig:
    stepover: float = 0.02               # plane spacing, m
    band_halfwidth: float | None = None  # default: 1.5 x median point spacing
    waypoint_spacing: float = 0.005      # m
    smoothing_window: int = 5            # odd
    angle_of_attack_deg: float = 2.0
    normal_k: int = 16
    clearance: float = 0.05              # approach/depart offset, m
    planarity_cell: float = 0.005        # raster cell for the validity check, m
    interpolation: str = "linear"        # contour resampling: linear | spline

    def __post_init__(self):
        if self.stepover <= 0 or self.waypoint_spacing <= 0 or self.clearance <= 0:
            raise InvalidParameter("lengths must be > 0")
        if self.band_halfwidth is not None and self.band_halfwidth <= 0:
            raise InvalidParameter("band_halfwidth must be > 0")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise InvalidParameter("smoothing_window must be odd and >= 1")
        if not 0.0 <= self.angle_of_attack_deg <= 15.0:
            raise InvalidParameter("angle of attack must be within [0, 15] degrees")
        if self.normal_k < 3:
            raise InvalidParameter("normal_k must be >= 3")
        if self.planarity_cell <= 0:
            raise InvalidParameter("planarity_cell must be > 0")
        if self.interpolation not in ("linear", "spline"):
            raise InvalidParameter("interpolation must be 'linear' or 'spline'")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PlannerConfig":
        return cls(**data)
