from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from qmoose.domain import Axis, GateKind
from qmoose.exceptions import ConfigurationError, NumericError
from qmoose.quantum import (
    Circuit,
    GateOp,
    StateVector,
    apply_cnot,
    apply_rotation,
    expectation_z,
    new_state,
    run_circuit,
    simulate,
)
from qmoose.quantum.statevector import NORM_TOLERANCE


def _state(amplitudes: list[complex]) -> StateVector:
    amps = np.asarray(amplitudes, dtype=np.complex128)
    return StateVector(int(math.log2(amps.shape[0])), amps)


def test_new_state_is_ground_state() -> None:
    state = new_state(3)

    assert state.amplitudes.shape == (8,)
    assert state.amplitudes[0] == 1.0
    assert np.count_nonzero(state.amplitudes) == 1


@pytest.mark.parametrize("n_qubits", [0, 21])
def test_new_state_rejects_register_sizes(n_qubits: int) -> None:
    with pytest.raises(ConfigurationError):
        new_state(n_qubits)


def test_rx_pi_flips_ground_state() -> None:
    state = apply_rotation(new_state(1), Axis.X, 0, math.pi)

    np.testing.assert_allclose(state.amplitudes, [0.0, -1j], atol=1e-15)


def test_rx_half_pi_creates_equal_superposition() -> None:
    state = apply_rotation(new_state(1), Axis.X, 0, math.pi / 2)

    np.testing.assert_allclose(state.amplitudes, [1 / math.sqrt(2), -1j / math.sqrt(2)])


def test_zero_rotation_is_identity() -> None:
    state = _state([0.6, 0.8j])

    for axis in Axis:
        np.testing.assert_allclose(apply_rotation(state, axis, 0, 0.0).amplitudes, [0.6, 0.8j])


def test_cnot_flips_target_when_control_set() -> None:
    # Qubit 0 is the most significant bit: |10> sits at index 2.
    state = apply_cnot(_state([0, 0, 1, 0]), control=0, target=1)

    np.testing.assert_array_equal(state.amplitudes, [0, 0, 0, 1])


def test_cnot_builds_bell_state() -> None:
    h = 1 / math.sqrt(2)
    state = apply_cnot(_state([h, 0, h, 0]), control=0, target=1)

    np.testing.assert_allclose(state.amplitudes, [h, 0, 0, h])


def test_cnot_rejects_equal_qubits() -> None:
    with pytest.raises(ConfigurationError):
        apply_cnot(new_state(2), control=1, target=1)


def test_expectation_z_on_basis_and_plus_states() -> None:
    h = 1 / math.sqrt(2)

    assert expectation_z(new_state(1), 0) == pytest.approx(1.0)
    assert expectation_z(_state([0, 1]), 0) == pytest.approx(-1.0)
    assert expectation_z(_state([h, h]), 0) == pytest.approx(0.0, abs=1e-15)


def test_rotation_rejects_bad_inputs() -> None:
    with pytest.raises(NumericError):
        apply_rotation(new_state(1), Axis.Y, 0, float("nan"))
    with pytest.raises(ConfigurationError):
        apply_rotation(new_state(2), Axis.Y, 2, 0.1)


def test_rotation_is_undone_by_negative_angle() -> None:
    state = apply_rotation(_state([0.6, 0.8j]), Axis.Y, 0, 0.37)
    restored = apply_rotation(state, Axis.Y, 0, -0.37)

    np.testing.assert_allclose(restored.amplitudes, [0.6, 0.8j], atol=1e-12)


def test_run_circuit_examples() -> None:
    theta = 0.73
    rx = Circuit(n_qubits=1, ops=(GateOp(kind=GateKind.RX, target=0, angle=theta),))
    entangled = Circuit(
        n_qubits=2,
        ops=(
            GateOp(kind=GateKind.RX, target=0, angle=math.pi),
            GateOp(kind=GateKind.CNOT, target=1, control=0),
        ),
        observable=(1,),
    )

    assert run_circuit(Circuit(n_qubits=2)) == pytest.approx(1.0)
    assert run_circuit(rx) == pytest.approx(math.cos(theta))
    assert run_circuit(entangled) == pytest.approx(-1.0)


def test_run_circuit_resolves_parameters() -> None:
    circuit = Circuit(
        n_qubits=1,
        ops=(
            GateOp(kind=GateKind.RY, target=0, param_id=0),
            GateOp(kind=GateKind.RY, target=0, param_id=1),
        ),
        n_params=2,
    )

    with pytest.raises(ConfigurationError):
        run_circuit(circuit, [0.1])
    assert run_circuit(circuit, [0.1], {1: 0.2}) == pytest.approx(math.cos(0.3))


def test_gate_validation() -> None:
    with pytest.raises(ValidationError):
        GateOp(kind=GateKind.CNOT, target=1, control=0, angle=0.5)
    with pytest.raises(ValidationError):
        GateOp(kind=GateKind.RX, target=0, control=1)
    with pytest.raises(ValidationError):
        Circuit(n_qubits=2, ops=(GateOp(kind=GateKind.RX, target=2),))


def test_run_circuit_is_deterministic() -> None:
    rng = np.random.default_rng(5)
    ops = tuple(
        GateOp(kind=GateKind.RY, target=int(q), angle=float(a))
        for q, a in zip(rng.integers(0, 3, 12), rng.uniform(-3, 3, 12), strict=True)
    )
    circuit = Circuit(n_qubits=3, ops=ops, observable=(0, 2))

    assert run_circuit(circuit) == run_circuit(circuit)


def test_batched_simulation_matches_single_runs() -> None:
    specs = ((GateKind.RX, 0, -1), (GateKind.CNOT, 1, 0), (GateKind.RZ, 1, -1))
    angles = np.random.default_rng(2).uniform(-math.pi, math.pi, size=(3, 4))
    angles[1] = 0.0

    batched = simulate(2, specs, angles)

    for column in range(4):
        single = simulate(2, specs, angles[:, column])
        np.testing.assert_allclose(batched[column], single, atol=1e-14)


@st.composite
def _random_circuits(draw: st.DrawFn) -> Circuit:
    n_qubits = draw(st.integers(min_value=1, max_value=6))
    n_ops = draw(st.integers(min_value=0, max_value=60))
    ops = []
    for _ in range(n_ops):
        target = draw(st.integers(min_value=0, max_value=n_qubits - 1))
        kind = draw(st.sampled_from(list(GateKind)))
        if kind is GateKind.CNOT:
            if n_qubits == 1:
                continue
            control = draw(
                st.integers(min_value=0, max_value=n_qubits - 1).filter(lambda q, t=target: q != t)
            )
            ops.append(GateOp(kind=kind, target=target, control=control))
        else:
            angle = draw(st.floats(min_value=-10.0, max_value=10.0))
            ops.append(GateOp(kind=kind, target=target, angle=angle))
    observable = draw(st.integers(min_value=0, max_value=n_qubits - 1))
    return Circuit(n_qubits=n_qubits, ops=tuple(ops), observable=(observable,))


@settings(max_examples=60, deadline=None)
@given(_random_circuits())
def test_gates_preserve_norm_and_bound_expectation(circuit: Circuit) -> None:
    angles = np.array([op.angle for op in circuit.ops], dtype=np.float64)
    amps = simulate(circuit.n_qubits, circuit.specs, angles)

    assert abs(np.linalg.norm(amps) - 1.0) < NORM_TOLERANCE
    assert -1.0 - 1e-12 <= run_circuit(circuit) <= 1.0 + 1e-12
