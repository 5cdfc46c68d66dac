"""Transition model containers and their training configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Annotated, Literal, Self

import numpy as np
from pydantic import Field, model_validator

from qmoose.domain import PHYSICAL_DIM, DomainModel, FeatureVector, FloatArray
from qmoose.exceptions import ConfigurationError, NumericError

NET_INPUT_DIM = 9
MIN_STD = 1e-8
HISTORY_TOLERANCE = 1e-9

Activation = Literal["tanh", "identity"]


@dataclass(frozen=True, slots=True)
class TransitionNet:
    """Feed-forward delta model ``[9 -> h -> h -> 5]`` with standardisation statistics.

    ``weights[i]`` has shape ``(fan_in, fan_out)``. Inputs are ``(features, action)``; outputs
    are deltas of ``(p, p_dot, cos_theta, sin_theta, theta_dot)``.
    """

    weights: tuple[FloatArray, ...]
    biases: tuple[FloatArray, ...]
    in_mean: FloatArray
    in_std: FloatArray
    out_mean: FloatArray
    out_std: FloatArray
    activation: Activation = "tanh"

    def __post_init__(self) -> None:
        if not self.weights or len(self.weights) != len(self.biases):
            msg = "TransitionNet needs one bias vector per weight matrix"
            raise ConfigurationError(msg)
        fan_in = NET_INPUT_DIM
        for index, (w, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            if w.ndim != 2 or w.shape[0] != fan_in or b.shape != (w.shape[1],):
                msg = f"Layer {index} has weight {w.shape} and bias {b.shape} after fan-in {fan_in}"
                raise ConfigurationError(msg)
            fan_in = w.shape[1]
        if fan_in != PHYSICAL_DIM:
            msg = f"TransitionNet must output {PHYSICAL_DIM} deltas, got {fan_in}"
            raise ConfigurationError(msg)
        if self.in_mean.shape != (NET_INPUT_DIM,) or self.in_std.shape != (NET_INPUT_DIM,):
            msg = "Input standardisation statistics must have 9 entries"
            raise ConfigurationError(msg)
        if self.out_mean.shape != (PHYSICAL_DIM,) or self.out_std.shape != (PHYSICAL_DIM,):
            msg = "Output standardisation statistics must have 5 entries"
            raise ConfigurationError(msg)
        if not all(np.all(np.isfinite(array)) for array in self.arrays()):
            msg = "TransitionNet parameters must be finite"
            raise NumericError(msg)
        if np.any(self.in_std < MIN_STD) or np.any(self.out_std < MIN_STD):
            msg = f"Standardisation std entries must be >= {MIN_STD}"
            raise ConfigurationError(msg)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (NET_INPUT_DIM, *(w.shape[1] for w in self.weights))

    def arrays(self) -> tuple[FloatArray, ...]:
        """Every parameter array in a fixed order."""

        layers: list[FloatArray] = []
        for w, b in zip(self.weights, self.biases, strict=True):
            layers.extend((w, b))
        return (*layers, self.in_mean, self.in_std, self.out_mean, self.out_std)


@dataclass(frozen=True, slots=True)
class TransitionEnsemble:
    models: tuple[TransitionNet, ...]
    seeds: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.models:
            msg = "An ensemble needs at least one model"
            raise ConfigurationError(msg)
        if len(self.seeds) != len(self.models):
            msg = f"{len(self.models)} models but {len(self.seeds)} seeds"
            raise ConfigurationError(msg)
        sizes = {(m.layer_sizes[0], m.layer_sizes[-1]) for m in self.models}
        if len(sizes) != 1:
            msg = f"Ensemble members disagree on input/output sizes: {sorted(sizes)}"
            raise ConfigurationError(msg)

    @property
    def k(self) -> int:
        return len(self.models)

    def __len__(self) -> int:
        return len(self.models)


@dataclass(frozen=True, slots=True)
class EnsembleFit:
    """A trained ensemble with each member's final standardised training MSE."""

    ensemble: TransitionEnsemble
    train_mse: tuple[float, ...]


class TransitionSample(DomainModel):
    """One logged ``(s_t, a_t, s_next)`` tuple with a consistent action history."""

    s_t: FeatureVector
    a_t: float
    s_next: FeatureVector

    @model_validator(mode="after")
    def check_history(self) -> Self:
        if not math.isfinite(self.a_t):
            msg = f"Action must be finite, got {self.a_t}"
            raise ValueError(msg)
        pairs = (
            (self.s_next.a_prev1, self.a_t),
            (self.s_next.a_prev2, self.s_t.a_prev1),
            (self.s_next.a_prev3, self.s_t.a_prev2),
        )
        if any(abs(left - right) > HISTORY_TOLERANCE for left, right in pairs):
            msg = "s_next action history does not follow from (s_t, a_t)"
            raise ValueError(msg)
        return self


class DynamicsTrainConfig(DomainModel):
    """Supervised fitting of each ensemble member (minibatch Adam on standardised MSE)."""

    hidden_size: Annotated[int, Field(ge=1)] = 64
    hidden_layers: Annotated[int, Field(ge=1)] = 2
    activation: Activation = "tanh"
    epochs: Annotated[int, Field(ge=1)] = 30
    batch_size: Annotated[int, Field(ge=1)] = 256
    learning_rate: Annotated[float, Field(gt=0.0)] = 1e-3
    beta1: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.9
    beta2: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.999
    eps: Annotated[float, Field(gt=0.0)] = 1e-8
    min_transitions: Annotated[int, Field(ge=1)] = 1000
    bootstrap: bool = True


__all__ = [
    "NET_INPUT_DIM",
    "Activation",
    "DynamicsTrainConfig",
    "EnsembleFit",
    "TransitionEnsemble",
    "TransitionNet",
    "TransitionSample",
]
