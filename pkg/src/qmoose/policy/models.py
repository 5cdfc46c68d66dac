"""Configuration and parameter containers for the variational quantum policy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Annotated, Self

import numpy as np
from pydantic import Field, model_validator

from qmoose.domain import (
    A_PREV1,
    A_PREV2,
    A_PREV3,
    FEATURE_DIM,
    P,
    P_DOT,
    THETA_DOT,
    DomainModel,
    FloatArray,
    ParamGroup,
)
from qmoose.exceptions import ConfigurationError

PositiveFloat = Annotated[float, Field(gt=0.0)]


class NormalizationSpec(DomainModel):
    """Per-feature scale; ``x -> pi * x / bound`` clamped to ``[-pi, pi]``.

    ``cos_theta`` and ``sin_theta`` are already bounded and pass through unchanged.
    """

    p: PositiveFloat = 2.4
    p_dot: PositiveFloat = 3.0
    theta_dot: PositiveFloat = 4.0
    action: PositiveFloat = 1.0

    def bounds(self) -> FloatArray:
        """Bounds over the 8 feature slots; NaN marks pass-through slots."""

        values = np.full(FEATURE_DIM, np.nan)
        values[P] = self.p
        values[P_DOT] = self.p_dot
        values[THETA_DOT] = self.theta_dot
        values[[A_PREV3, A_PREV2, A_PREV1]] = self.action
        return values


class PolicyConfig(DomainModel):
    """Shape and trainability of the quantum policy circuit."""

    n_qubits: Annotated[int, Field(ge=1, le=FEATURE_DIM)] = FEATURE_DIM
    n_layers: Annotated[int, Field(ge=1)] = 2
    data_reuploading: bool = True
    trainable_input_weights: bool = True
    trainable_output_weight: bool = True
    input_weights_per_layer: bool = True
    observable_qubits: tuple[int, ...] = (0,)
    action_clip: Annotated[float, Field(ge=0.0)] = 1.0
    feature_indices: tuple[int, ...] = tuple(range(FEATURE_DIM))
    normalization: NormalizationSpec = NormalizationSpec()
    single_precision_inference: bool = False

    @model_validator(mode="after")
    def check_dimensions(self) -> Self:
        if len(self.feature_indices) != self.n_qubits:
            msg = (
                f"n_qubits ({self.n_qubits}) must equal the number of encoded features "
                f"({len(self.feature_indices)})"
            )
            raise ValueError(msg)
        if len(set(self.feature_indices)) != len(self.feature_indices) or any(
            not 0 <= index < FEATURE_DIM for index in self.feature_indices
        ):
            msg = f"feature_indices must be distinct values in [0, {FEATURE_DIM})"
            raise ValueError(msg)
        if not self.observable_qubits or any(
            not 0 <= qubit < self.n_qubits for qubit in self.observable_qubits
        ):
            msg = f"observable_qubits must name qubits in [0, {self.n_qubits})"
            raise ValueError(msg)
        return self

    @property
    def encoding_layers(self) -> int:
        return self.n_layers if self.data_reuploading else 1

    @property
    def input_rows(self) -> int:
        return self.encoding_layers if self.input_weights_per_layer else 1

    @property
    def n_input(self) -> int:
        return self.input_rows * self.n_qubits

    @property
    def n_variational(self) -> int:
        return self.n_layers * self.n_qubits * 3

    @property
    def n_params(self) -> int:
        return self.n_input + self.n_variational + 1

    @property
    def frozen_groups(self) -> frozenset[ParamGroup]:
        frozen: set[ParamGroup] = set()
        if not self.trainable_input_weights:
            frozen.add(ParamGroup.INPUT)
        if not self.trainable_output_weight:
            frozen.add(ParamGroup.OUTPUT)
        return frozenset(frozen)

    def without_trainable_weights(self) -> PolicyConfig:
        return self.model_copy(
            update={"trainable_input_weights": False, "trainable_output_weight": False}
        )


@dataclass(frozen=True, slots=True)
class PolicyParams:
    """All trainable quantities of the policy.

    ``input_weights`` has shape ``(input_rows, n_qubits)``, ``variational`` has shape
    ``(n_layers, n_qubits, 3)`` holding the RZ, RY, RZ angles of each qubit.
    """

    input_weights: FloatArray
    variational: FloatArray
    output_weight: float
    frozen: frozenset[ParamGroup] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.variational.ndim != 3 or self.variational.shape[2] != 3:
            msg = f"variational must have shape (layers, qubits, 3), got {self.variational.shape}"
            raise ConfigurationError(msg)
        if self.input_weights.ndim != 2 or self.input_weights.shape[1] != self.variational.shape[1]:
            msg = (
                f"input_weights shape {self.input_weights.shape} does not match "
                f"{self.variational.shape[1]} qubits"
            )
            raise ConfigurationError(msg)
        if not (
            np.all(np.isfinite(self.input_weights))
            and np.all(np.isfinite(self.variational))
            and math.isfinite(self.output_weight)
        ):
            msg = "Policy parameters must be finite"
            raise ConfigurationError(msg)

    @property
    def n_params(self) -> int:
        return int(self.input_weights.size + self.variational.size + 1)

    def to_vector(self) -> FloatArray:
        """Flat layout: input weights, variational angles, output weight."""

        return np.concatenate(
            [self.input_weights.ravel(), self.variational.ravel(), [self.output_weight]]
        )

    def with_vector(self, vector: FloatArray) -> PolicyParams:
        if vector.shape != (self.n_params,):
            msg = f"Expected a vector of {self.n_params} parameters, got {vector.shape}"
            raise ConfigurationError(msg)
        n_input = self.input_weights.size
        n_var = self.variational.size
        return replace(
            self,
            input_weights=vector[:n_input].reshape(self.input_weights.shape).copy(),
            variational=vector[n_input : n_input + n_var].reshape(self.variational.shape).copy(),
            output_weight=float(vector[-1]),
        )

    def group_mask(self, groups: frozenset[ParamGroup]) -> FloatArray:
        """1.0 over flat entries that belong to ``groups``."""

        mask = np.zeros(self.n_params, dtype=np.float64)
        n_input = self.input_weights.size
        if ParamGroup.INPUT in groups:
            mask[:n_input] = 1.0
        if ParamGroup.VARIATIONAL in groups:
            mask[n_input:-1] = 1.0
        if ParamGroup.OUTPUT in groups:
            mask[-1] = 1.0
        return mask

    def trainable_mask(self) -> FloatArray:
        return self.group_mask(frozenset(ParamGroup) - self.frozen)


@dataclass(frozen=True, slots=True)
class PolicyGradient:
    """Derivatives of one action w.r.t. every parameter group and the raw features."""

    d_input: FloatArray
    d_variational: FloatArray
    d_output: float
    d_features: FloatArray
    expectation: float
    action: float

    def to_vector(self) -> FloatArray:
        return np.concatenate([self.d_input.ravel(), self.d_variational.ravel(), [self.d_output]])


__all__ = [
    "NormalizationSpec",
    "PolicyConfig",
    "PolicyGradient",
    "PolicyParams",
]
