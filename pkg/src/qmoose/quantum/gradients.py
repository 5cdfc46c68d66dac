"""Parameter-shift and adjoint gradients of circuit expectations."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence

import numpy as np
import numpy.typing as npt

from qmoose.domain import Axis, FloatArray, GateKind
from qmoose.exceptions import UnsupportedGateError

from .circuit import Circuit, OpSpec, measure, resolve_angles, simulate
from .statevector import (
    apply_cnot_amplitudes,
    apply_matrix,
    apply_pauli,
    observable_diagonal,
    rotation_matrices,
)

SHIFT = math.pi / 2

_GENERATOR = {GateKind.RX: Axis.X, GateKind.RY: Axis.Y, GateKind.RZ: Axis.Z}


def adjoint_gate_gradients(
    n_qubits: int,
    specs: Sequence[OpSpec],
    angles: FloatArray,
    observable: tuple[int, ...],
    *,
    dtype: npt.DTypeLike = np.complex128,
) -> tuple[FloatArray, FloatArray]:
    """Expectation and its derivative w.r.t. every gate angle.

    One forward sweep prepares the final state; one backward sweep un-applies each gate from
    both the ket and the observable-weighted bra. For ``R(t) = exp(-i t P / 2)`` the
    derivative at gate ``i`` is ``Im <bra_i| P |ket_i>``.

    ``angles`` has shape ``(len(specs), *batch)``. Returns ``(expectation, grads)`` with
    shapes ``batch`` and ``(len(specs), *batch)``; CNOT rows are zero.
    """

    ket = simulate(n_qubits, specs, angles, dtype=dtype)
    bra = ket * observable_diagonal(n_qubits, observable)
    expectation = np.real(np.sum(np.conj(ket) * bra, axis=-1))
    grads = np.zeros(angles.shape, dtype=np.float64)
    for position in range(len(specs) - 1, -1, -1):
        kind, target, control = specs[position]
        if kind is GateKind.CNOT:
            ket = apply_cnot_amplitudes(ket, control, target, n_qubits)
            bra = apply_cnot_amplitudes(bra, control, target, n_qubits)
            continue
        generated = apply_pauli(ket, _GENERATOR[kind], target, n_qubits)
        grads[position] = np.imag(np.sum(np.conj(bra) * generated, axis=-1))
        inverse = rotation_matrices(kind, -angles[position])
        ket = apply_matrix(ket, inverse, target, n_qubits)
        bra = apply_matrix(bra, inverse, target, n_qubits)
    return np.asarray(expectation, dtype=np.float64), grads


def _accumulate(circuit: Circuit, gate_grads: FloatArray) -> FloatArray:
    grads = np.zeros(circuit.n_params, dtype=np.float64)
    for position, op in enumerate(circuit.ops):
        if op.param_id is not None and op.param_id < circuit.n_params:
            grads[op.param_id] += op.scale * gate_grads[position]
    return grads


def _require_rotations(circuit: Circuit) -> None:
    for position, op in enumerate(circuit.ops):
        if op.param_id is not None and not op.kind.is_rotation:
            msg = f"Gate {position} ({op.kind}) is trainable but has no shift rule"
            raise UnsupportedGateError(msg)


def grad_parameter_shift(
    circuit: Circuit,
    params: Sequence[float] | FloatArray,
    bindings: Mapping[int, float] | None = None,
) -> FloatArray:
    """``d<Z>/d param_k`` from two shifted evaluations per gate fed by ``param_k``."""

    _require_rotations(circuit)
    angles = resolve_angles(circuit, params, bindings)
    specs = circuit.specs
    positions = [
        position for position, op in enumerate(circuit.ops) if op.param_id is not None
    ]
    if not positions:
        return np.zeros(circuit.n_params, dtype=np.float64)
    # Column 2j shifts gate positions[j] by +pi/2, column 2j+1 by -pi/2.
    shifted = np.repeat(angles[:, None], 2 * len(positions), axis=1)
    for column, position in enumerate(positions):
        shifted[position, 2 * column] += SHIFT
        shifted[position, 2 * column + 1] -= SHIFT
    values = measure(
        simulate(circuit.n_qubits, specs, shifted), circuit.n_qubits, circuit.observable
    )
    gate_grads = np.zeros(len(specs), dtype=np.float64)
    for column, position in enumerate(positions):
        gate_grads[position] = (values[2 * column] - values[2 * column + 1]) / 2.0
    return _accumulate(circuit, gate_grads)


def grad_adjoint(
    circuit: Circuit,
    params: Sequence[float] | FloatArray,
    bindings: Mapping[int, float] | None = None,
) -> FloatArray:
    """Same contract as :func:`grad_parameter_shift`, from one forward and one backward sweep."""

    _require_rotations(circuit)
    angles = resolve_angles(circuit, params, bindings)
    _, gate_grads = adjoint_gate_gradients(
        circuit.n_qubits, circuit.specs, angles, circuit.observable
    )
    return _accumulate(circuit, gate_grads)


__all__ = [
    "SHIFT",
    "adjoint_gate_gradients",
    "grad_adjoint",
    "grad_parameter_shift",
]
