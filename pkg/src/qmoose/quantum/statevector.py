"""Dense statevector kernels for few-qubit circuits.

Qubit 0 is the most significant bit of the basis index, so ``|10>`` means qubit 0 is set.
Every kernel accepts amplitude arrays with arbitrary leading batch axes
(shape ``(..., 2**n)``); rotation angles broadcast against those leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from qmoose.domain import Axis, ComplexArray, FloatArray, GateKind, IntArray
from qmoose.exceptions import ConfigurationError, NumericError

MAX_QUBITS = 20
NORM_TOLERANCE = 1e-10


@dataclass(frozen=True, slots=True)
class StateVector:
    """Dense amplitude vector of an ``n_qubits`` register."""

    n_qubits: int
    amplitudes: ComplexArray

    def __post_init__(self) -> None:
        _check_qubit_count(self.n_qubits)
        expected = 1 << self.n_qubits
        if self.amplitudes.shape[-1:] != (expected,):
            msg = (
                f"State of {self.n_qubits} qubits needs {expected} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )
            raise ConfigurationError(msg)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> FloatArray:
        return np.abs(self.amplitudes) ** 2


def _check_qubit_count(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        msg = f"Qubit count must lie in [1, {MAX_QUBITS}], got {n_qubits}"
        raise ConfigurationError(msg)


def check_qubit_index(qubit: int, n_qubits: int) -> None:
    if not 0 <= qubit < n_qubits:
        msg = f"Qubit index {qubit} outside register of {n_qubits} qubits"
        raise ConfigurationError(msg)


def zero_amplitudes(
    n_qubits: int,
    batch_shape: tuple[int, ...] = (),
    dtype: npt.DTypeLike = np.complex128,
) -> ComplexArray:
    """Return ``|0...0>`` amplitudes, optionally repeated over ``batch_shape``."""

    _check_qubit_count(n_qubits)
    amps = np.zeros((*batch_shape, 1 << n_qubits), dtype=dtype)
    amps[..., 0] = 1.0
    return amps


def rotation_matrices(kind: GateKind, angles: FloatArray | float) -> ComplexArray:
    """Matrices of ``exp(-i * angle * P / 2)`` with shape ``(*angles.shape, 2, 2)``."""

    theta = np.asarray(angles, dtype=np.float64)
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    zero = np.zeros_like(c)
    if kind is GateKind.RX:
        rows = ((c + 0j, -1j * s), (-1j * s, c + 0j))
    elif kind is GateKind.RY:
        rows = ((c + 0j, -s + 0j), (s + 0j, c + 0j))
    elif kind is GateKind.RZ:
        rows = ((c - 1j * s, zero + 0j), (zero + 0j, c + 1j * s))
    else:
        msg = f"{kind} is not a rotation gate"
        raise ConfigurationError(msg)
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


def _qubit_view(amps: ComplexArray, qubit: int, n_qubits: int) -> ComplexArray:
    lead = amps.shape[:-1]
    return amps.reshape(*lead, 1 << qubit, 2, 1 << (n_qubits - qubit - 1))


def apply_matrix(
    amps: ComplexArray, matrices: ComplexArray, qubit: int, n_qubits: int
) -> ComplexArray:
    """Apply a (batched) 2x2 matrix to ``qubit``; returns a new array."""

    view = _qubit_view(amps, qubit, n_qubits)
    out = np.einsum("...ij,...ajb->...aib", matrices.astype(amps.dtype, copy=False), view)
    return out.reshape(amps.shape)


def apply_pauli(amps: ComplexArray, axis: Axis, qubit: int, n_qubits: int) -> ComplexArray:
    """Apply the bare Pauli operator ``axis`` to ``qubit``."""

    view = _qubit_view(amps, qubit, n_qubits)
    if axis is Axis.Z:
        out = view * np.array([1.0, -1.0])[:, None]
    elif axis is Axis.X:
        out = np.flip(view, axis=-2)
    else:
        out = np.flip(view, axis=-2) * np.array([-1j, 1j])[:, None]
    return np.ascontiguousarray(out).reshape(amps.shape)


@lru_cache(maxsize=512)
def cnot_permutation(n_qubits: int, control: int, target: int) -> IntArray:
    """Index map that swaps target-bit partners wherever the control bit is set."""

    index = np.arange(1 << n_qubits, dtype=np.int64)
    control_mask = 1 << (n_qubits - 1 - control)
    target_mask = 1 << (n_qubits - 1 - target)
    perm = np.where(index & control_mask, index ^ target_mask, index)
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=512)
def z_signs(n_qubits: int, qubit: int) -> FloatArray:
    """Eigenvalues of ``Z_qubit`` over the computational basis."""

    index = np.arange(1 << n_qubits, dtype=np.int64)
    bits = (index >> (n_qubits - 1 - qubit)) & 1
    signs = 1.0 - 2.0 * bits.astype(np.float64)
    signs.setflags(write=False)
    return signs


def observable_diagonal(n_qubits: int, observable: tuple[int, ...]) -> FloatArray:
    """Diagonal of the mean of ``Z_q`` over the observable qubits."""

    return np.mean([z_signs(n_qubits, q) for q in observable], axis=0)


def apply_cnot_amplitudes(
    amps: ComplexArray, control: int, target: int, n_qubits: int
) -> ComplexArray:
    return amps[..., cnot_permutation(n_qubits, control, target)]


def new_state(n_qubits: int) -> StateVector:
    """Return the ground state ``|0...0>``."""

    return StateVector(n_qubits, zero_amplitudes(n_qubits))


def apply_rotation(state: StateVector, axis: Axis, qubit: int, angle: float) -> StateVector:
    """Apply ``R_axis(angle) = exp(-i angle P / 2)`` to ``qubit``."""

    check_qubit_index(qubit, state.n_qubits)
    if not math.isfinite(angle):
        msg = f"Rotation angle must be finite, got {angle}"
        raise NumericError(msg)
    matrix = rotation_matrices(axis.gate, angle)
    return StateVector(
        state.n_qubits, apply_matrix(state.amplitudes, matrix, qubit, state.n_qubits)
    )


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` on every basis state whose ``control`` bit is 1."""

    check_qubit_index(control, state.n_qubits)
    check_qubit_index(target, state.n_qubits)
    if control == target:
        msg = f"CNOT control and target must differ (both {control})"
        raise ConfigurationError(msg)
    return StateVector(
        state.n_qubits,
        apply_cnot_amplitudes(state.amplitudes, control, target, state.n_qubits),
    )


def expectation_z(state: StateVector, qubit: int) -> float:
    """Return ``<Z_qubit>`` of a single (unbatched) state."""

    check_qubit_index(qubit, state.n_qubits)
    probs = state.probabilities()
    return float(np.sum(probs * z_signs(state.n_qubits, qubit), axis=-1))


__all__ = [
    "MAX_QUBITS",
    "NORM_TOLERANCE",
    "StateVector",
    "apply_cnot",
    "apply_cnot_amplitudes",
    "apply_matrix",
    "apply_pauli",
    "apply_rotation",
    "check_qubit_index",
    "cnot_permutation",
    "expectation_z",
    "new_state",
    "observable_diagonal",
    "rotation_matrices",
    "z_signs",
    "zero_amplitudes",
]
