"""Discrete 6-axis PID over the wrench error.

Rectangle-rule integral with per-axis clamp, backward-difference
derivative with a first-order low-pass; value-semantics state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParameter
from .wrench import as_wrench


@dataclass
class PidGains:
    kp: np.ndarray
    ki: np.ndarray
    kd: np.ndarray
    derivative_beta: float = 0.9       # low-pass coefficient in [0, 1)
    integral_clamp: np.ndarray | None = None

    def __post_init__(self):
        self.kp = as_wrench(self.kp)
        self.ki = as_wrench(self.ki)
        self.kd = as_wrench(self.kd)
        if np.any(self.kp < 0) or np.any(self.ki < 0) or np.any(self.kd < 0):
            raise InvalidParameter("gains must be >= 0")
        if not 0.0 <= self.derivative_beta < 1.0:
            raise InvalidParameter("derivative_beta must be in [0, 1)")
        if self.integral_clamp is None:
            self.integral_clamp = np.full(6, np.inf)
        else:
            self.integral_clamp = np.asarray(self.integral_clamp, dtype=np.float64).ravel()
            if self.integral_clamp.shape != (6,):
                raise InvalidParameter("integral clamp needs 6 components")
        if np.any((self.ki > 0) & ~(self.integral_clamp > 0)):
            raise InvalidParameter("integral clamp must be > 0 wherever ki > 0")

    @classmethod
    def scalar_z(cls, kp: float, ki: float, kd: float, beta: float = 0.9,
                 clamp: float = np.inf) -> "PidGains":
        z = np.zeros(6)
        g = lambda v: np.where(np.arange(6) == 2, v, 0.0)
        return cls(g(kp), g(ki), g(kd), derivative_beta=beta,
                   integral_clamp=np.full(6, clamp))

    def to_dict(self) -> dict:
        return {"kp": self.kp.tolist(), "ki": self.ki.tolist(), "kd": self.kd.tolist(),
                "derivative_beta": self.derivative_beta,
                "integral_clamp": [None if not np.isfinite(c) else float(c)
                                   for c in self.integral_clamp]}

    @classmethod
    def from_dict(cls, data: dict) -> "PidGains":
        clamp = data.get("integral_clamp")
        if clamp is not None:
            clamp = np.asarray([np.inf if c is None else c for c in clamp])
        return cls(np.asarray(data["kp"]), np.asarray(data["ki"]), np.asarray(data["kd"]),
                   derivative_beta=data.get("derivative_beta", 0.9), integral_clamp=clamp)


@dataclass
class PidState:
    integral: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prev_error: np.ndarray = field(default_factory=lambda: np.zeros(6))
    filtered_derivative: np.ndarray = field(default_factory=lambda: np.zeros(6))
    initialized: bool = False

    def copy(self) -> "PidState":
        return PidState(self.integral.copy(), self.prev_error.copy(),
                        self.filtered_derivative.copy(), self.initialized)


def pid_step(state: PidState, error, dt: float, gains: PidGains):
    """One controller step; returns (u, new state).

    The derivative is zero on the first call (no previous error yet).
    """
    if dt <= 0:
        raise InvalidParameter("dt must be > 0")
    e = as_wrench(error)
    integral = state.integral + e * dt
    integral = np.clip(integral, -gains.integral_clamp, gains.integral_clamp)
    raw = (e - state.prev_error) / dt if state.initialized else np.zeros(6)
    beta = gains.derivative_beta
    filtered = beta * state.filtered_derivative + (1.0 - beta) * raw
    u = gains.kp * e + gains.ki * integral + gains.kd * filtered
    return u, PidState(integral=integral, prev_error=e.copy(),
                       filtered_derivative=filtered, initialized=True)
