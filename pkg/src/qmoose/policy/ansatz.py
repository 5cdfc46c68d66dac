"""Strongly entangling ansatz with trainable RX encoding and optional data reuploading."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from qmoose.domain import FeatureVector, FloatArray, GateKind, IntArray
from qmoose.exceptions import ConfigurationError
from qmoose.quantum import Circuit, GateOp, OpSpec

from .models import PolicyConfig, PolicyParams

_VARIATIONAL_GATES = (GateKind.RZ, GateKind.RY, GateKind.RZ)


@dataclass(frozen=True, slots=True)
class AnsatzLayout:
    """Gate sequence of a policy config plus where parameters and features enter it.

    Encoding gate ``e`` sits at ``enc_positions[e]``, rotates by
    ``input_weights.flat[enc_params[e]] * x[enc_qubits[e]]``. Variational angle ``v``
    (flat index into ``variational``) sits at ``var_positions[v]``.
    """

    n_qubits: int
    specs: tuple[OpSpec, ...]
    enc_positions: IntArray
    enc_params: IntArray
    enc_qubits: IntArray
    var_positions: IntArray
    input_scatter: FloatArray
    qubit_scatter: FloatArray

    @property
    def n_ops(self) -> int:
        return len(self.specs)

    def angles(self, params: PolicyParams, x: FloatArray) -> FloatArray:
        """Gate angles of shape ``(n_ops, batch)`` for normalised encoded features ``x``."""

        angles = np.zeros((self.n_ops, x.shape[0]), dtype=np.float64)
        weights = params.input_weights.ravel()[self.enc_params]
        angles[self.enc_positions] = weights[:, None] * x[:, self.enc_qubits].T
        angles[self.var_positions] = params.variational.ravel()[:, None]
        return angles


def _ring(n_qubits: int) -> list[tuple[int, int]]:
    if n_qubits == 1:
        return []
    return [(qubit, (qubit + 1) % n_qubits) for qubit in range(n_qubits)]


@lru_cache(maxsize=64)
def ansatz_layout(config: PolicyConfig) -> AnsatzLayout:
    n = config.n_qubits
    specs: list[OpSpec] = []
    enc_positions: list[int] = []
    enc_params: list[int] = []
    enc_qubits: list[int] = []
    var_positions: list[int] = []
    for layer in range(config.n_layers):
        if layer == 0 or config.data_reuploading:
            row = layer if config.input_weights_per_layer else 0
            for qubit in range(n):
                enc_positions.append(len(specs))
                enc_params.append(row * n + qubit)
                enc_qubits.append(qubit)
                specs.append((GateKind.RX, qubit, -1))
        for qubit in range(n):
            for kind in _VARIATIONAL_GATES:
                var_positions.append(len(specs))
                specs.append((kind, qubit, -1))
        for control, target in _ring(n):
            specs.append((GateKind.CNOT, target, control))

    enc_params_arr = np.array(enc_params, dtype=np.int64)
    enc_qubits_arr = np.array(enc_qubits, dtype=np.int64)
    input_scatter = np.zeros((config.n_input, len(enc_params)), dtype=np.float64)
    input_scatter[enc_params_arr, np.arange(len(enc_params))] = 1.0
    qubit_scatter = np.zeros((n, len(enc_qubits)), dtype=np.float64)
    qubit_scatter[enc_qubits_arr, np.arange(len(enc_qubits))] = 1.0
    return AnsatzLayout(
        n_qubits=n,
        specs=tuple(specs),
        enc_positions=np.array(enc_positions, dtype=np.int64),
        enc_params=enc_params_arr,
        enc_qubits=enc_qubits_arr,
        var_positions=np.array(var_positions, dtype=np.int64),
        input_scatter=input_scatter,
        qubit_scatter=qubit_scatter,
    )


def check_params(config: PolicyConfig, params: PolicyParams) -> None:
    expected_input = (config.input_rows, config.n_qubits)
    expected_var = (config.n_layers, config.n_qubits, 3)
    if params.input_weights.shape != expected_input or params.variational.shape != expected_var:
        msg = (
            f"Parameters {params.input_weights.shape}/{params.variational.shape} do not match "
            f"config {expected_input}/{expected_var}"
        )
        raise ConfigurationError(msg)


def build_circuit(
    config: PolicyConfig, features: FeatureVector, params: PolicyParams
) -> Circuit:
    """Materialise the ansatz for one normalised feature vector.

    Parameter ids index the flat policy vector (input weights, then variational angles); the
    output weight is applied outside the circuit.
    """

    check_params(config, params)
    layout = ansatz_layout(config)
    x = features.to_array()[list(config.feature_indices)]
    enc_lookup = {
        int(pos): (int(param), int(qubit))
        for pos, param, qubit in zip(
            layout.enc_positions, layout.enc_params, layout.enc_qubits, strict=True
        )
    }
    var_lookup = {int(pos): index for index, pos in enumerate(layout.var_positions)}
    ops: list[GateOp] = []
    for position, (kind, target, control) in enumerate(layout.specs):
        if kind is GateKind.CNOT:
            ops.append(GateOp(kind=kind, target=target, control=control))
        elif position in enc_lookup:
            param, qubit = enc_lookup[position]
            ops.append(GateOp(kind=kind, target=target, param_id=param, scale=float(x[qubit])))
        else:
            ops.append(
                GateOp(kind=kind, target=target, param_id=config.n_input + var_lookup[position])
            )
    return Circuit(
        n_qubits=config.n_qubits,
        ops=tuple(ops),
        observable=config.observable_qubits,
        n_params=config.n_input + config.n_variational,
    )


__all__ = ["AnsatzLayout", "ansatz_layout", "build_circuit", "check_params"]
