"""Cart-pole world configuration and state models."""

from __future__ import annotations

import math
from typing import Annotated, Self

from pydantic import Field, field_validator, model_validator

from qmoose.domain import DomainModel

PositiveFloat = Annotated[float, Field(gt=0.0)]


def wrap_angle(theta: float) -> float:
    """Wrap an angle into ``(-pi, pi]``."""

    wrapped = math.pi - (math.pi - theta) % (2.0 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


class PhysicalState(DomainModel):
    """Cart position/velocity and pole angle (from upright) / angular velocity."""

    p: float
    p_dot: float
    theta: float
    theta_dot: float

    @model_validator(mode="after")
    def check_state(self) -> Self:
        values = (self.p, self.p_dot, self.theta, self.theta_dot)
        if not all(math.isfinite(value) for value in values):
            msg = f"Physical state must be finite, got {values}"
            raise ValueError(msg)
        if not -math.pi < self.theta <= math.pi:
            msg = f"theta must lie in (-pi, pi], got {self.theta}"
            raise ValueError(msg)
        return self

    @classmethod
    def upright(cls) -> PhysicalState:
        return cls(p=0.0, p_dot=0.0, theta=0.0, theta_dot=0.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p, self.p_dot, self.theta, self.theta_dot)


class RewardConfig(DomainModel):
    """Quadratic penalty weights of the balancing reward."""

    omega_weight: Annotated[float, Field(ge=0.0)] = 0.1
    omega_ref: PositiveFloat = 2.0 * math.pi
    gate_degrees: PositiveFloat = 15.0

    @property
    def gate_radians(self) -> float:
        return math.radians(self.gate_degrees)


class WorldConfig(DomainModel):
    """Physical constants of the simulated rig (classic benchmark values)."""

    cart_mass: PositiveFloat = 1.0
    pole_mass: PositiveFloat = 0.1
    pole_half_length: PositiveFloat = 0.5
    gravity: PositiveFloat = 9.8
    force_scale: PositiveFloat = 10.0
    dt: Annotated[float, Field(ge=0.001, le=0.1)] = 0.020
    track_limit: PositiveFloat = 2.4
    fail_angle: PositiveFloat = 0.4
    sensor_noise_std: Annotated[float, Field(ge=0.0)] = 0.0
    reward: RewardConfig = RewardConfig()

    @property
    def total_mass(self) -> float:
        return self.cart_mass + self.pole_mass

    @property
    def polemass_length(self) -> float:
        return self.pole_mass * self.pole_half_length


class BehaviorSpec(DomainModel):
    """Behaviour policy used to generate the offline dataset.

    Each step takes a uniform random action with probability ``random_fraction``, otherwise
    a noisy proportional controller ``k . (p, p_dot, theta, theta_dot)``.
    """

    random_fraction: Annotated[float, Field(ge=0.0, le=1.0)] = 0.3
    gains: tuple[float, float, float, float] = (0.1, 0.15, 1.8, 0.3)
    action_noise_std: Annotated[float, Field(ge=0.0)] = 0.1
    max_episode_steps: Annotated[int, Field(ge=1)] = 500
    start_position: Annotated[float, Field(ge=0.0)] = 1.5
    start_angle: Annotated[float, Field(ge=0.0)] = 0.1
    start_velocity: Annotated[float, Field(ge=0.0)] = 0.1

    @field_validator("gains")
    @classmethod
    def finite_gains(
        cls, value: tuple[float, float, float, float]
    ) -> tuple[float, float, float, float]:
        if not all(math.isfinite(gain) for gain in value):
            msg = "Behaviour gains must be finite"
            raise ValueError(msg)
        return value


__all__ = ["BehaviorSpec", "PhysicalState", "RewardConfig", "WorldConfig", "wrap_angle"]
