"""Policy input features shared by the policy, dynamics and world layers."""

from __future__ import annotations

import math
from typing import Self

import numpy as np
from pydantic import model_validator

from .base import DomainModel
from .types import FloatArray

FEATURE_DIM = 8
PHYSICAL_DIM = 5
P, P_DOT, COS_THETA, SIN_THETA, THETA_DOT, A_PREV3, A_PREV2, A_PREV1 = range(FEATURE_DIM)
FEATURE_NAMES: tuple[str, ...] = (
    "p",
    "p_dot",
    "cos_theta",
    "sin_theta",
    "theta_dot",
    "a_prev3",
    "a_prev2",
    "a_prev1",
)

UNIT_CIRCLE_TOLERANCE = 1e-6


class FeatureVector(DomainModel):
    """The 8-component policy input (p, p_dot, cos, sin, theta_dot, a_t-3, a_t-2, a_t-1)."""

    p: float
    p_dot: float
    cos_theta: float
    sin_theta: float
    theta_dot: float
    a_prev3: float = 0.0
    a_prev2: float = 0.0
    a_prev1: float = 0.0

    @model_validator(mode="after")
    def check_invariants(self) -> Self:
        values = self.as_tuple()
        if not all(math.isfinite(value) for value in values):
            msg = f"Feature vector contains non-finite values: {values}"
            raise ValueError(msg)
        radius = self.cos_theta**2 + self.sin_theta**2
        if abs(radius - 1.0) > UNIT_CIRCLE_TOLERANCE:
            msg = f"cos_theta^2 + sin_theta^2 must equal 1 (got {radius:.9f})"
            raise ValueError(msg)
        return self

    @classmethod
    def from_state(
        cls,
        p: float,
        p_dot: float,
        theta: float,
        theta_dot: float,
        history: tuple[float, float, float] = (0.0, 0.0, 0.0),
    ) -> FeatureVector:
        """Embed a physical state plus the three previous actions."""

        return cls(
            p=p,
            p_dot=p_dot,
            cos_theta=math.cos(theta),
            sin_theta=math.sin(theta),
            theta_dot=theta_dot,
            a_prev3=history[0],
            a_prev2=history[1],
            a_prev1=history[2],
        )

    @classmethod
    def from_array(cls, values: FloatArray) -> FeatureVector:
        if values.shape != (FEATURE_DIM,):
            msg = f"Expected {FEATURE_DIM} feature values, got shape {values.shape}"
            raise ValueError(msg)
        return cls(**dict(zip(FEATURE_NAMES, (float(v) for v in values), strict=True)))

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.p,
            self.p_dot,
            self.cos_theta,
            self.sin_theta,
            self.theta_dot,
            self.a_prev3,
            self.a_prev2,
            self.a_prev1,
        )

    def to_array(self) -> FloatArray:
        return np.array(self.as_tuple(), dtype=np.float64)

    @property
    def theta(self) -> float:
        return math.atan2(self.sin_theta, self.cos_theta)

    @property
    def history(self) -> tuple[float, float, float]:
        return (self.a_prev3, self.a_prev2, self.a_prev1)


__all__ = [
    "A_PREV1",
    "A_PREV2",
    "A_PREV3",
    "COS_THETA",
    "FEATURE_DIM",
    "FEATURE_NAMES",
    "PHYSICAL_DIM",
    "P",
    "P_DOT",
    "SIN_THETA",
    "THETA_DOT",
    "FeatureVector",
]
