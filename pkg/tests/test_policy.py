from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from qmoose.domain import FEATURE_DIM, P, SIN_THETA, FeatureVector, GateKind, ParamGroup
from qmoose.exceptions import ConfigurationError, DataError
from qmoose.policy import (
    NormalizationSpec,
    PolicyCheckpoint,
    PolicyConfig,
    PolicyParams,
    QuantumPolicy,
    act,
    act_batch,
    build_circuit,
    init_policy,
    jacobian_batch,
    load_policy,
    normalize_array,
    normalize_features,
    policy_gradient,
    save_policy,
    weight_groups,
)


def _rx(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def _zero_params(config: PolicyConfig, output_weight: float) -> PolicyParams:
    return PolicyParams(
        input_weights=np.zeros((config.input_rows, config.n_qubits)),
        variational=np.zeros((config.n_layers, config.n_qubits, 3)),
        output_weight=output_weight,
    )


@pytest.fixture
def raw_features() -> FeatureVector:
    return FeatureVector.from_state(0.4, -0.3, 0.12, 0.6, history=(0.2, -0.35, 0.1))


def test_default_policy_layout() -> None:
    config = PolicyConfig()
    params = init_policy(config, seed=0)

    assert config.n_params == 65
    assert params.n_params == 65
    assert params.input_weights.shape == (2, 8)
    assert params.variational.shape == (2, 8, 3)
    assert np.all(params.input_weights == 1.0)
    assert params.output_weight == 1.0
    assert np.all((params.variational >= 0) & (params.variational < 2 * math.pi))


def test_init_is_seeded() -> None:
    config = PolicyConfig()

    np.testing.assert_array_equal(
        init_policy(config, 3).to_vector(), init_policy(config, 3).to_vector()
    )
    assert not np.array_equal(
        init_policy(config, 3).variational, init_policy(config, 4).variational
    )


def test_without_trainable_weights_freezes_scalars() -> None:
    config = PolicyConfig().without_trainable_weights()
    params = init_policy(config, seed=0)

    assert config.frozen_groups == frozenset({ParamGroup.INPUT, ParamGroup.OUTPUT})
    assert np.all(params.input_weights == 1.0)
    assert params.output_weight == 1.0
    assert params.trainable_mask().sum() == config.n_variational


@pytest.mark.parametrize(
    ("reuploading", "n_layers", "expected_gates", "expected_rx"),
    [(True, 2, 80, 16), (False, 2, 72, 8), (True, 1, 40, 8)],
)
def test_gate_counts(
    raw_features: FeatureVector,
    reuploading: bool,
    n_layers: int,
    expected_gates: int,
    expected_rx: int,
) -> None:
    config = PolicyConfig(n_layers=n_layers, data_reuploading=reuploading)
    circuit = build_circuit(config, raw_features, init_policy(config, 0))

    assert len(circuit.ops) == expected_gates
    assert sum(op.kind is GateKind.RX for op in circuit.ops) == expected_rx
    assert sum(op.kind is GateKind.CNOT for op in circuit.ops) == 8 * n_layers


def test_zero_angles_give_output_weight(raw_features: FeatureVector) -> None:
    config = PolicyConfig()

    assert act(config, _zero_params(config, 0.7), raw_features) == pytest.approx(0.7)
    assert act(config, _zero_params(config, 0.0), raw_features) == 0.0


def test_single_qubit_policy_matches_matrix_product() -> None:
    config = PolicyConfig(n_qubits=1, n_layers=1, feature_indices=(P,), action_clip=0.0)
    params = PolicyParams(
        input_weights=np.array([[0.8]]),
        variational=np.array([[[0.3, -1.2, 0.9]]]),
        output_weight=1.5,
    )
    features = FeatureVector.from_state(0.5, 0.0, 0.0, 0.0)
    x = math.pi * 0.5 / 2.4

    psi = _rz(0.9) @ _ry(-1.2) @ _rz(0.3) @ _rx(0.8 * x) @ np.array([1.0, 0.0])
    expected = 1.5 * (abs(psi[0]) ** 2 - abs(psi[1]) ** 2)

    assert act(config, params, features) == pytest.approx(expected, abs=1e-10)


def test_action_is_bounded_by_output_weight() -> None:
    config = PolicyConfig(action_clip=0.0)
    rng = np.random.default_rng(8)
    raw = np.column_stack(
        [
            rng.normal(size=(16, 2)),
            np.cos(angles := rng.uniform(-math.pi, math.pi, 16)),
            np.sin(angles),
            rng.normal(size=(16, 4)),
        ]
    )
    params = init_policy(config, 8)
    params = params.with_vector(np.concatenate([params.to_vector()[:-1], [2.5]]))

    actions = act_batch(config, params, raw)

    assert np.all(np.abs(actions) <= 2.5 + 1e-12)


def test_action_clip_bounds_output() -> None:
    config = PolicyConfig(action_clip=0.5)
    params = _zero_params(config, 3.0)

    raw = np.zeros((1, FEATURE_DIM))
    raw[0, 2] = 1.0

    assert act_batch(config, params, raw)[0] == 0.5


def test_normalization_examples() -> None:
    spec = NormalizationSpec()
    raw = np.zeros((3, FEATURE_DIM))
    raw[0, P] = spec.p
    raw[1, P] = 2 * spec.p
    raw[2, SIN_THETA] = 0.8

    normalized, _ = normalize_array(raw, spec)

    assert normalized[0, P] == pytest.approx(math.pi)
    assert normalized[1, P] == pytest.approx(math.pi)
    assert normalized[2, SIN_THETA] == 0.8
    np.testing.assert_array_equal(normalize_array(np.zeros((1, 8)), spec)[0], np.zeros((1, 8)))


def test_normalize_features_keeps_angle_components(raw_features: FeatureVector) -> None:
    normalized = normalize_features(raw_features, NormalizationSpec())

    assert normalized.cos_theta == raw_features.cos_theta
    assert normalized.sin_theta == raw_features.sin_theta
    assert normalized.p == pytest.approx(math.pi * raw_features.p / 2.4)


def test_normalization_rejects_zero_bound() -> None:
    with pytest.raises(ValidationError):
        NormalizationSpec(p=0.0)


def test_config_rejects_mismatched_feature_count() -> None:
    with pytest.raises(ValidationError):
        PolicyConfig(n_qubits=2, feature_indices=(0, 1, 2))
    with pytest.raises(ValidationError):
        PolicyConfig(n_qubits=2, feature_indices=(1, 1))


def test_parameter_gradient_matches_finite_difference(raw_features: FeatureVector) -> None:
    config = PolicyConfig(action_clip=0.0)
    params = init_policy(config, seed=3)
    grad = policy_gradient(config, params, raw_features).to_vector()

    base = params.to_vector()
    h = 1e-5
    fd = np.zeros_like(base)
    for k in range(base.shape[0]):
        up, down = base.copy(), base.copy()
        up[k] += h
        down[k] -= h
        fd[k] = (
            act(config, params.with_vector(up), raw_features)
            - act(config, params.with_vector(down), raw_features)
        ) / (2 * h)

    np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-8)


def test_feature_gradient_matches_finite_difference() -> None:
    config = PolicyConfig(action_clip=0.0)
    params = init_policy(config, seed=5)
    raw = np.array([[0.2, -0.5, math.cos(0.1), math.sin(0.1), 0.3, 0.1, -0.2, 0.4]])

    jac = jacobian_batch(config, params, raw)

    h = 1e-6
    for column in range(FEATURE_DIM):
        up, down = raw.copy(), raw.copy()
        up[0, column] += h
        down[0, column] -= h
        fd = (act_batch(config, params, up)[0] - act_batch(config, params, down)[0]) / (2 * h)
        assert jac.features[0, column] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_zero_feature_has_zero_input_weight_gradient() -> None:
    config = PolicyConfig()
    params = init_policy(config, seed=1)
    features = FeatureVector.from_state(0.0, 0.4, 0.1, -0.2)

    grad = policy_gradient(config, params, features)

    assert np.all(grad.d_input[:, P] == 0.0)


def test_output_weight_gradient_is_expectation(raw_features: FeatureVector) -> None:
    config = PolicyConfig()

    grad = policy_gradient(config, _zero_params(config, 0.5), raw_features)

    assert grad.d_output == pytest.approx(1.0)
    assert grad.expectation == pytest.approx(1.0)


def test_frozen_groups_receive_zero_gradient(raw_features: FeatureVector) -> None:
    config = PolicyConfig(action_clip=0.0).without_trainable_weights()
    grad = policy_gradient(config, init_policy(config, seed=2), raw_features)

    assert np.all(grad.d_input == 0.0)
    assert grad.d_output == 0.0
    assert np.any(grad.d_variational != 0.0)


def test_reuploading_changes_the_policy() -> None:
    with_reuploading = PolicyConfig(action_clip=0.0)
    without = PolicyConfig(action_clip=0.0, data_reuploading=False)
    params = init_policy(with_reuploading, seed=9)
    single_row = PolicyParams(
        input_weights=params.input_weights[:1].copy(),
        variational=params.variational,
        output_weight=params.output_weight,
    )
    rng = np.random.default_rng(9)
    angles = rng.uniform(-0.3, 0.3, 6)
    raw = np.column_stack(
        [rng.normal(size=(6, 2)), np.cos(angles), np.sin(angles), rng.normal(size=(6, 4))]
    )

    diff = act_batch(with_reuploading, params, raw) - act_batch(without, single_row, raw)

    assert np.max(np.abs(diff)) > 1e-3


def test_feature_order_matters(raw_features: FeatureVector) -> None:
    forward = PolicyConfig(action_clip=0.0)
    reversed_order = PolicyConfig(
        action_clip=0.0, feature_indices=tuple(reversed(range(FEATURE_DIM)))
    )
    params = init_policy(forward, seed=6)

    original = act(forward, params, raw_features)
    permuted = act(reversed_order, params, raw_features)

    assert abs(original - permuted) > 1e-6


def test_quantum_policy_paths_agree(raw_features: FeatureVector) -> None:
    config = PolicyConfig()
    policy = QuantumPolicy(config, init_policy(config, seed=4))

    action, timings = policy.timed_act(raw_features.to_array())

    assert policy.act(raw_features) == pytest.approx(act(config, policy.params, raw_features))
    assert action == pytest.approx(policy.act_batch(raw_features.to_array()[None, :])[0])
    assert timings.total_ms >= 0.0
    with pytest.raises(ConfigurationError):
        policy.timed_act(np.zeros(3))


def test_single_precision_inference_is_close(raw_features: FeatureVector) -> None:
    config = PolicyConfig()
    params = init_policy(config, seed=4)
    single = QuantumPolicy(config.model_copy(update={"single_precision_inference": True}), params)

    assert single.act(raw_features) == pytest.approx(act(config, params, raw_features), abs=1e-5)


def test_mismatched_params_are_rejected() -> None:
    params = init_policy(PolicyConfig(n_layers=1), seed=0)

    with pytest.raises(ConfigurationError):
        QuantumPolicy(PolicyConfig(n_layers=2), params)


def test_weight_groups_expose_each_group() -> None:
    params = init_policy(PolicyConfig(), seed=0)
    groups = weight_groups(params)

    assert groups[ParamGroup.INPUT].shape == (2, 8)
    assert groups[ParamGroup.VARIATIONAL].shape == (2, 8, 3)
    assert groups[ParamGroup.OUTPUT].tolist() == [1.0]


def test_checkpoint_save_and_load(tmp_path: Path) -> None:
    config = PolicyConfig().without_trainable_weights()
    params = init_policy(config, seed=12)
    path = save_policy(
        tmp_path / "policy.json", PolicyCheckpoint.capture(config, params, seed=12, step=7)
    )

    loaded = load_policy(path)

    assert loaded.step == 7
    assert loaded.config == config
    assert set(loaded.frozen_groups) == {ParamGroup.INPUT, ParamGroup.OUTPUT}
    np.testing.assert_array_equal(loaded.to_params().to_vector(), params.to_vector())


def test_load_missing_checkpoint(tmp_path: Path) -> None:
    with pytest.raises(DataError):
        load_policy(tmp_path / "missing.json")
