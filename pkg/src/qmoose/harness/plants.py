"""Plants the harness can close the loop around: the simulator and the learned surrogate."""

from __future__ import annotations

import math
from typing import Protocol

import numpy as np

from qmoose.domain import FeatureVector
from qmoose.dynamics import TransitionNet, net_forward, step_features
from qmoose.world import PhysicalState, WorldConfig, physics_step, wrap_angle


class Plant(Protocol):
    world: WorldConfig

    def reset(self, start: FeatureVector) -> None: ...

    def observe(self) -> FeatureVector: ...

    def physical_state(self) -> PhysicalState: ...

    def step(self, action: float) -> None: ...


def _shift(history: tuple[float, float, float], action: float) -> tuple[float, float, float]:
    return (history[1], history[2], action)


class WorldPlant:
    """Ground-truth physics; observations carry optional Gaussian sensor noise."""

    def __init__(self, world: WorldConfig, rng: np.random.Generator | None = None) -> None:
        self.world = world
        self._rng = rng or np.random.default_rng(0)
        self._state = PhysicalState.upright()
        self._history: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def reset(self, start: FeatureVector) -> None:
        self._state = PhysicalState(
            p=start.p, p_dot=start.p_dot, theta=wrap_angle(start.theta), theta_dot=start.theta_dot
        )
        self._history = start.history

    def observe(self) -> FeatureVector:
        p, p_dot, theta, theta_dot = self._state.as_tuple()
        noise = self.world.sensor_noise_std
        if noise > 0:
            p, p_dot, theta, theta_dot = (
                value + noise * float(self._rng.standard_normal())
                for value in (p, p_dot, theta, theta_dot)
            )
        return FeatureVector.from_state(p, p_dot, theta, theta_dot, self._history)

    def physical_state(self) -> PhysicalState:
        return self._state

    def step(self, action: float) -> None:
        self._state = physics_step(self._state, action, self.world)
        self._history = _shift(self._history, action)


class SurrogatePlant:
    """Feature-space plant driven by ensemble members, fixed or round-robin."""

    def __init__(
        self,
        models: tuple[TransitionNet, ...],
        world: WorldConfig,
        *,
        round_robin: bool = False,
    ) -> None:
        self.world = world
        self._models = models
        self._round_robin = round_robin
        self._t = 0
        self._features = FeatureVector.from_state(0.0, 0.0, 0.0, 0.0)

    def reset(self, start: FeatureVector) -> None:
        self._features = start
        self._t = 0

    def observe(self) -> FeatureVector:
        return self._features

    def physical_state(self) -> PhysicalState:
        s = self._features
        theta = math.atan2(s.sin_theta, s.cos_theta)
        return PhysicalState(p=s.p, p_dot=s.p_dot, theta=wrap_angle(theta), theta_dot=s.theta_dot)

    def step(self, action: float) -> None:
        index = self._t % len(self._models) if self._round_robin else 0
        model = self._models[index]
        self._features = step_features(
            self._features, action, net_forward(model, self._features, action)
        )
        self._t += 1


__all__ = ["Plant", "SurrogatePlant", "WorldPlant"]
