"""Per-scan-line robust polynomial regression.

Each laser line is fitted as height z over the line's lateral arc parameter
(cumulative chord length of the xy projection). Points far off the fit are
excluded and the line refitted, so a defect does not drag the baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientPoints, MissingLineIndex
from ..geometry.cloud import PointCloud
from .config import PerceptionConfig


@dataclass
class LineFit:
    line_id: int
    coefficients: np.ndarray   # polynomial over centered arc parameter t
    t_center: float            # arc-parameter offset used for conditioning
    residuals: np.ndarray      # signed z distance per point, meters
    rms_residual: float
    inlier_mask: np.ndarray    # points used by the final fit

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(t - self.t_center, self.coefficients)


def line_arc_parameter(points: np.ndarray) -> np.ndarray:
    """Cumulative chord length of the xy projection of an ordered line."""
    d = np.diff(points[:, :2], axis=0)
    return np.concatenate(([0.0], np.cumsum(np.hypot(d[:, 0], d[:, 1]))))


def fit_line_robust(points: np.ndarray, cfg: PerceptionConfig, line_id: int = 0) -> LineFit:
    """Iteratively reweighted polynomial fit of one scan line.

    Fit, drop points with |residual| above the threshold, refit; stop at a
    fixed point or after the configured iteration budget. Residuals are
    reported for every point against the final fit.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(points)
    if n < cfg.poly_degree + 2:
        raise InsufficientPoints(
            f"line {line_id}: need at least degree+2={cfg.poly_degree + 2} points, have {n}")
    t = line_arc_parameter(points)
    t_center = float(t.mean())
    tc = t - t_center
    z = points[:, 2]
    used = np.ones(n, dtype=bool)
    coeffs = np.zeros(cfg.poly_degree + 1)
    for it in range(cfg.robust_iterations):
        coeffs = np.polynomial.polynomial.polyfit(tc[used], z[used], cfg.poly_degree)
        res = z - np.polynomial.polynomial.polyval(tc, coeffs)
        nxt = np.abs(res) <= cfg.residual_threshold_abs
        # Stop at a fixed point; never refit on a degenerate inlier set.
        if nxt.sum() < cfg.poly_degree + 2 or np.array_equal(nxt, used):
            break
        if it < cfg.robust_iterations - 1:
            used = nxt
    res = z - np.polynomial.polynomial.polyval(tc, coeffs)
    return LineFit(line_id=line_id,
                   coefficients=coeffs,
                   t_center=t_center,
                   residuals=res,
                   rms_residual=float(np.sqrt(np.mean(res ** 2))),
                   inlier_mask=used)


def regression_candidates(cloud: PointCloud, cfg: PerceptionConfig):
    """Flag defect candidates per line; returns (mask, residuals, skipped lines).

    Undersized lines are skipped and reported, not fatal; their residuals
    stay NaN and their points are never flagged.
    """
    if cloud.line_index is None:
        raise MissingLineIndex("cloud has no line_index")
    n = len(cloud)
    mask = np.zeros(n, dtype=bool)
    residuals = np.full(n, np.nan)
    skipped: list[int] = []
    for line_id, idx in cloud.lines():
        pts = cloud.points[idx]
        if len(pts) < cfg.poly_degree + 2:
            skipped.append(line_id)
            continue
        fit = fit_line_robust(pts, cfg, line_id=line_id)
        residuals[idx] = fit.residuals
        mask[idx] = np.abs(fit.residuals) > cfg.residual_threshold_abs
    return mask, residuals, skipped
