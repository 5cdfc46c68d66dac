"""Configuration and result containers of model-based policy training."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Annotated

import numpy as np
from pydantic import Field

from qmoose.domain import DomainModel, FeatureVector, FloatArray, ModelExpectation
from qmoose.exceptions import ConfigurationError
from qmoose.world import WorldConfig

UnitInterval = Annotated[float, Field(ge=0.0, le=1.0)]


class TrainConfig(DomainModel):
    """Hyperparameters of rollout-based policy optimisation."""

    gamma: UnitInterval = 0.99
    horizon: Annotated[int, Field(ge=1)] = 100
    eval_horizon: Annotated[int, Field(ge=1)] = 200
    n_init: Annotated[int, Field(ge=1)] = 400
    ensemble_batch: Annotated[int, Field(ge=1)] = 64
    learning_rate: Annotated[float, Field(gt=0.0)] = 0.01
    beta1: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.9
    beta2: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.999
    eps: Annotated[float, Field(gt=0.0)] = 1e-8
    epochs: Annotated[int, Field(ge=0)] = 2000
    checkpoint_every: Annotated[int, Field(ge=1)] = 100
    seed: int = 0
    model_expectation: ModelExpectation = ModelExpectation.SAMPLED
    grad_clip: Annotated[float, Field(ge=0.0)] = 10.0
    divergence_bound: Annotated[float, Field(gt=0.0)] = 1e6
    world: WorldConfig = WorldConfig()


@dataclass(frozen=True, slots=True)
class RolloutResult:
    """One imagined trajectory.

    ``states[t]`` is the state the policy acted on, ``rewards[t]`` is earned on arrival in
    the next state. ``grad`` is ``d return / d params`` in the flat parameter layout.
    """

    states: FloatArray
    actions: FloatArray
    rewards: FloatArray
    discounted_return: float
    grad: FloatArray
    truncated: bool = False

    @property
    def length(self) -> int:
        return len(self.rewards)

    @property
    def trajectory(self) -> list[tuple[FeatureVector, float, float]]:
        return [
            (FeatureVector.from_array(state), float(action), float(rew))
            for state, action, rew in zip(self.states, self.actions, self.rewards, strict=True)
        ]


@dataclass(frozen=True, slots=True)
class BatchLoss:
    """Negative mean return of a minibatch of rollouts and its gradient."""

    loss: float
    grad: FloatArray
    returns: FloatArray
    truncated: int


@dataclass(frozen=True, slots=True)
class WeightStats:
    """Mean absolute magnitude of each parameter group."""

    input: float
    variational: float
    output: float


@dataclass(frozen=True, slots=True)
class ReportRow:
    step: int
    loss: float
    weights: WeightStats
    wall_ms: float


@dataclass(frozen=True, slots=True)
class TrainReport:
    rows: tuple[ReportRow, ...] = ()

    def __post_init__(self) -> None:
        steps = [row.step for row in self.rows]
        if any(later <= earlier for earlier, later in zip(steps, steps[1:], strict=False)):
            msg = f"Report steps must strictly increase, got {steps}"
            raise ConfigurationError(msg)
        if any(row.wall_ms < 0 for row in self.rows):
            msg = "Report wall-clock times must be non-negative"
            raise ConfigurationError(msg)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def losses(self) -> FloatArray:
        return np.array([row.loss for row in self.rows], dtype=np.float64)


__all__ = [
    "BatchLoss",
    "ReportRow",
    "RolloutResult",
    "TrainConfig",
    "TrainReport",
    "WeightStats",
]
