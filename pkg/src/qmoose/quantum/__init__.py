"""Statevector simulation and circuit gradients."""

from .circuit import Circuit, GateOp, OpSpec, measure, resolve_angles, run_circuit, simulate
from .gradients import adjoint_gate_gradients, grad_adjoint, grad_parameter_shift
from .statevector import (
    MAX_QUBITS,
    StateVector,
    apply_cnot,
    apply_rotation,
    expectation_z,
    new_state,
)

__all__ = [
    "MAX_QUBITS",
    "Circuit",
    "GateOp",
    "OpSpec",
    "StateVector",
    "adjoint_gate_gradients",
    "apply_cnot",
    "apply_rotation",
    "expectation_z",
    "grad_adjoint",
    "grad_parameter_shift",
    "measure",
    "new_state",
    "resolve_angles",
    "run_circuit",
    "simulate",
]
