"""Quantum policy evaluation, gradients and initialisation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from qmoose.domain import FEATURE_DIM, FeatureVector, FloatArray, ParamGroup
from qmoose.exceptions import ConfigurationError, NumericError
from qmoose.quantum import adjoint_gate_gradients, measure, simulate

from .ansatz import ansatz_layout, check_params
from .models import NormalizationSpec, PolicyConfig, PolicyGradient, PolicyParams


def init_policy(config: PolicyConfig, seed: int) -> PolicyParams:
    """Angles uniform in ``[0, 2 pi)``, input and output weights at 1.0."""

    rng = np.random.default_rng(seed)
    variational = rng.uniform(0.0, 2.0 * math.pi, size=(config.n_layers, config.n_qubits, 3))
    return PolicyParams(
        input_weights=np.ones((config.input_rows, config.n_qubits), dtype=np.float64),
        variational=variational,
        output_weight=1.0,
        frozen=config.frozen_groups,
    )


def normalize_array(raw: FloatArray, spec: NormalizationSpec) -> tuple[FloatArray, FloatArray]:
    """Normalise raw features of shape ``(batch, 8)``; also returns ``d norm / d raw``."""

    bounds = spec.bounds()
    passthrough = np.isnan(bounds)
    scale = np.where(passthrough, 1.0, math.pi / np.where(passthrough, 1.0, bounds))
    scaled = raw * scale
    normalized = np.where(passthrough, raw, np.clip(scaled, -math.pi, math.pi))
    inside = passthrough | (np.abs(scaled) < math.pi)
    return normalized, np.where(inside, scale, 0.0)


def normalize_features(raw: FeatureVector, bounds: NormalizationSpec) -> FeatureVector:
    """Map each bounded component through ``pi * x / bound`` and clamp to ``[-pi, pi]``."""

    normalized, _ = normalize_array(raw.to_array()[None, :], bounds)
    return FeatureVector.from_array(normalized[0])


def _check_finite(raw: FloatArray) -> None:
    if not np.all(np.isfinite(raw)):
        msg = "Policy features must be finite"
        raise NumericError(msg)


def _clip(config: PolicyConfig, actions: FloatArray) -> FloatArray:
    if config.action_clip > 0:
        return np.clip(actions, -config.action_clip, config.action_clip)
    return actions


def expectations(
    config: PolicyConfig,
    params: PolicyParams,
    normalized: FloatArray,
    *,
    single_precision: bool = False,
) -> FloatArray:
    """``<Z>`` for a batch of normalised features of shape ``(batch, 8)``."""

    layout = ansatz_layout(config)
    x = normalized[:, list(config.feature_indices)]
    dtype = np.complex64 if single_precision else np.complex128
    amps = simulate(layout.n_qubits, layout.specs, layout.angles(params, x), dtype=dtype)
    return measure(amps, layout.n_qubits, config.observable_qubits)


def act_batch(config: PolicyConfig, params: PolicyParams, raw: FloatArray) -> FloatArray:
    """Actions for raw features of shape ``(batch, 8)``."""

    _check_finite(raw)
    normalized, _ = normalize_array(raw, config.normalization)
    values = expectations(config, params, normalized)
    return _clip(config, params.output_weight * values)


@dataclass(frozen=True, slots=True)
class PolicyJacobian:
    """Batched derivatives of the action.

    ``params`` has shape ``(batch, n_params)`` in the flat parameter layout and
    ``features`` has shape ``(batch, 8)`` w.r.t. raw features.
    """

    actions: FloatArray
    expectations: FloatArray
    params: FloatArray
    features: FloatArray


def jacobian_batch(config: PolicyConfig, params: PolicyParams, raw: FloatArray) -> PolicyJacobian:
    """Actions and their gradients for raw features of shape ``(batch, 8)``.

    Circuit derivatives come from one adjoint sweep per sample; the chain through
    ``RX(w * x)`` gives ``x * dE/dangle`` for the weight and ``w * dE/dangle`` for the feature.
    """

    check_params(config, params)
    _check_finite(raw)
    layout = ansatz_layout(config)
    normalized, d_norm = normalize_array(raw, config.normalization)
    columns = list(config.feature_indices)
    x = normalized[:, columns]
    values, gate_grads = adjoint_gate_gradients(
        layout.n_qubits, layout.specs, layout.angles(params, x), config.observable_qubits
    )
    enc_grads = gate_grads[layout.enc_positions]
    weights = params.input_weights.ravel()[layout.enc_params]

    d_input = (layout.input_scatter @ (enc_grads * x[:, layout.enc_qubits].T)).T
    d_variational = gate_grads[layout.var_positions].T
    d_encoded = (layout.qubit_scatter @ (weights[:, None] * enc_grads)).T
    d_raw = np.zeros_like(raw)
    d_raw[:, columns] = d_encoded * d_norm[:, columns]

    w_out = params.output_weight
    raw_actions = w_out * values
    actions = _clip(config, raw_actions)
    # Clamped actions carry no gradient.
    live = (actions == raw_actions).astype(np.float64)[:, None]
    d_params = np.concatenate([w_out * d_input, w_out * d_variational, values[:, None]], axis=1)
    trainable = frozenset(ParamGroup) - (params.frozen | config.frozen_groups)
    d_params = d_params * live * params.group_mask(trainable)[None, :]
    return PolicyJacobian(
        actions=actions,
        expectations=values,
        params=d_params,
        features=w_out * d_raw * live,
    )


def act(config: PolicyConfig, params: PolicyParams, features: FeatureVector) -> float:
    """``w_out * <Z>`` for raw features, clamped to ``action_clip`` when it is positive."""

    check_params(config, params)
    return float(act_batch(config, params, features.to_array()[None, :])[0])


def policy_gradient(
    config: PolicyConfig, params: PolicyParams, features: FeatureVector
) -> PolicyGradient:
    """Gradient of one action w.r.t. every trainable quantity; frozen groups are zero."""

    jac = jacobian_batch(config, params, features.to_array()[None, :])
    flat = jac.params[0]
    n_input = params.input_weights.size
    return PolicyGradient(
        d_input=flat[:n_input].reshape(params.input_weights.shape),
        d_variational=flat[n_input:-1].reshape(params.variational.shape),
        d_output=float(flat[-1]),
        d_features=jac.features[0],
        expectation=float(jac.expectations[0]),
        action=float(jac.actions[0]),
    )


@dataclass(frozen=True, slots=True)
class StageTimings:
    """Wall-clock cost of one action split into pipeline stages (milliseconds)."""

    preprocess_ms: float
    circuit_ms: float
    postprocess_ms: float

    @property
    def total_ms(self) -> float:
        return self.preprocess_ms + self.circuit_ms + self.postprocess_ms


@dataclass(frozen=True, slots=True)
class QuantumPolicy:
    """A configured policy bound to its parameters."""

    config: PolicyConfig
    params: PolicyParams

    def __post_init__(self) -> None:
        check_params(self.config, self.params)

    def act(self, features: FeatureVector) -> float:
        return self.act_array(features.to_array())

    def act_array(self, raw: FloatArray) -> float:
        """Inference path; honours ``single_precision_inference``."""

        action, _ = self.timed_act(raw)
        return action

    def timed_act(self, raw: FloatArray) -> tuple[float, StageTimings]:
        start = time.perf_counter()
        if raw.shape != (FEATURE_DIM,):
            msg = f"Expected {FEATURE_DIM} raw features, got shape {raw.shape}"
            raise ConfigurationError(msg)
        _check_finite(raw)
        normalized, _ = normalize_array(raw[None, :], self.config.normalization)
        encoded = time.perf_counter()
        value = expectations(
            self.config,
            self.params,
            normalized,
            single_precision=self.config.single_precision_inference,
        )
        simulated = time.perf_counter()
        action = float(_clip(self.config, self.params.output_weight * value)[0])
        done = time.perf_counter()
        return action, StageTimings(
            preprocess_ms=(encoded - start) * 1e3,
            circuit_ms=(simulated - encoded) * 1e3,
            postprocess_ms=(done - simulated) * 1e3,
        )

    def act_batch(self, raw: FloatArray) -> FloatArray:
        return act_batch(self.config, self.params, raw)

    def jacobian(self, raw: FloatArray) -> PolicyJacobian:
        return jacobian_batch(self.config, self.params, raw)

    def with_params(self, params: PolicyParams) -> QuantumPolicy:
        return QuantumPolicy(self.config, params)


def weight_groups(params: PolicyParams) -> dict[ParamGroup, FloatArray]:
    return {
        ParamGroup.INPUT: params.input_weights,
        ParamGroup.VARIATIONAL: params.variational,
        ParamGroup.OUTPUT: np.array([params.output_weight]),
    }


__all__ = [
    "PolicyJacobian",
    "QuantumPolicy",
    "StageTimings",
    "act",
    "act_batch",
    "expectations",
    "init_policy",
    "jacobian_batch",
    "normalize_array",
    "normalize_features",
    "policy_gradient",
    "weight_groups",
]
