"""Circuit description and forward simulation."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import Annotated, Self

import numpy as np
import numpy.typing as npt
from pydantic import Field, model_validator

from qmoose.domain import ComplexArray, DomainModel, FloatArray, GateKind
from qmoose.exceptions import ConfigurationError, NumericError

from .statevector import (
    MAX_QUBITS,
    apply_cnot_amplitudes,
    apply_matrix,
    observable_diagonal,
    rotation_matrices,
    zero_amplitudes,
)

OpSpec = tuple[GateKind, int, int]


class GateOp(DomainModel):
    """One gate of a circuit.

    The effective rotation angle is ``angle + scale * value(param_id)``; the scale lets an
    encoding gate carry ``RX(w_i * x_i)`` with ``w_i`` as the parameter and ``x_i`` as the
    scale.
    """

    kind: GateKind
    target: Annotated[int, Field(ge=0)]
    control: Annotated[int | None, Field(ge=0)] = None
    angle: float = 0.0
    param_id: Annotated[int | None, Field(ge=0)] = None
    scale: float = 1.0

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        if self.kind is GateKind.CNOT:
            if self.control is None:
                msg = "CNOT requires a control qubit"
                raise ValueError(msg)
            if self.control == self.target:
                msg = f"CNOT control and target must differ (both {self.target})"
                raise ValueError(msg)
            if self.angle != 0.0 or self.param_id is not None:
                msg = "CNOT carries no angle and no param_id"
                raise ValueError(msg)
        elif self.control is not None:
            msg = f"{self.kind} takes no control qubit"
            raise ValueError(msg)
        return self

    @property
    def spec(self) -> OpSpec:
        return (self.kind, self.target, -1 if self.control is None else self.control)


class Circuit(DomainModel):
    """Ordered gate list over ``n_qubits`` with a Z-basis observable."""

    n_qubits: Annotated[int, Field(ge=1, le=MAX_QUBITS)]
    ops: tuple[GateOp, ...] = ()
    observable: tuple[int, ...] = (0,)
    n_params: Annotated[int, Field(ge=0)] = 0

    @model_validator(mode="after")
    def check_indices(self) -> Self:
        if not self.observable:
            msg = "Observable must name at least one qubit"
            raise ValueError(msg)
        for qubit in self.observable:
            if not 0 <= qubit < self.n_qubits:
                msg = f"Observable qubit {qubit} outside register of {self.n_qubits}"
                raise ValueError(msg)
        for position, op in enumerate(self.ops):
            for qubit in (op.target, op.control):
                if qubit is not None and qubit >= self.n_qubits:
                    msg = f"Gate {position} ({op.kind}) addresses qubit {qubit} >= {self.n_qubits}"
                    raise ValueError(msg)
            if op.param_id is not None and op.param_id >= self.n_params:
                msg = f"Gate {position} uses param_id {op.param_id} >= n_params {self.n_params}"
                raise ValueError(msg)
        return self

    @property
    def specs(self) -> tuple[OpSpec, ...]:
        return tuple(op.spec for op in self.ops)

    def trainable_positions(self) -> dict[int, list[int]]:
        """Map each parameter id to the gate positions it feeds."""

        positions: dict[int, list[int]] = {}
        for position, op in enumerate(self.ops):
            if op.param_id is not None:
                positions.setdefault(op.param_id, []).append(position)
        return positions


def resolve_angles(
    circuit: Circuit,
    param_values: Sequence[float] | FloatArray,
    bindings: Mapping[int, float] | None = None,
) -> FloatArray:
    """Effective angle of every gate (0 for CNOT).

    A parameter id resolves through ``bindings`` first, then through ``param_values``.
    """

    values = np.asarray(param_values, dtype=np.float64)
    angles = np.zeros(len(circuit.ops), dtype=np.float64)
    for position, op in enumerate(circuit.ops):
        if op.kind is GateKind.CNOT:
            continue
        angle = op.angle
        if op.param_id is not None:
            if bindings is not None and op.param_id in bindings:
                value = float(bindings[op.param_id])
            elif op.param_id < values.shape[0]:
                value = float(values[op.param_id])
            else:
                msg = f"Gate {position} references unresolved param_id {op.param_id}"
                raise ConfigurationError(msg)
            angle += op.scale * value
        angles[position] = angle
    if not np.all(np.isfinite(angles)):
        msg = "Circuit angles must be finite"
        raise NumericError(msg)
    return angles


def simulate(
    n_qubits: int,
    specs: Sequence[OpSpec],
    angles: FloatArray,
    *,
    dtype: npt.DTypeLike = np.complex128,
) -> ComplexArray:
    """Run ``specs`` on ``|0...0>``.

    ``angles`` has shape ``(len(specs), *batch)``; the result has shape ``(*batch, 2**n)``.
    """

    batch_shape = tuple(angles.shape[1:])
    amps = zero_amplitudes(n_qubits, batch_shape, dtype)
    for (kind, target, control), angle in zip(specs, angles, strict=True):
        if kind is GateKind.CNOT:
            amps = apply_cnot_amplitudes(amps, control, target, n_qubits)
        else:
            amps = apply_matrix(amps, rotation_matrices(kind, angle), target, n_qubits)
    return amps


def measure(amps: ComplexArray, n_qubits: int, observable: tuple[int, ...]) -> FloatArray:
    """Mean single-qubit ``<Z>`` over ``observable`` for (batched) amplitudes."""

    probs = np.abs(amps) ** 2
    return np.asarray(probs @ observable_diagonal(n_qubits, observable), dtype=np.float64)


def run_circuit(
    circuit: Circuit,
    param_values: Sequence[float] | FloatArray = (),
    bindings: Mapping[int, float] | None = None,
) -> float:
    """Expectation of the circuit observable after applying ``circuit.ops`` to ``|0...0>``."""

    angles = resolve_angles(circuit, param_values, bindings)
    amps = simulate(circuit.n_qubits, circuit.specs, angles)
    return float(measure(amps, circuit.n_qubits, circuit.observable))


__all__ = [
    "Circuit",
    "GateOp",
    "OpSpec",
    "measure",
    "resolve_angles",
    "run_circuit",
    "simulate",
]
