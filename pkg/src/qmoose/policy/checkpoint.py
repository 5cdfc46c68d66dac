"""JSON checkpoints for policy parameters."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from qmoose.domain import DomainModel, ParamGroup
from qmoose.exceptions import DataError

from .ansatz import check_params
from .models import PolicyConfig, PolicyParams

CHECKPOINT_FORMAT = "qmoose.policy/v1"


class PolicyCheckpoint(DomainModel):
    """Self-describing policy document.

    ``input_weights`` is ``[input_rows][n_qubits]``, ``variational`` is
    ``[n_layers][n_qubits][3]`` (RZ, RY, RZ angles in radians), ``output_weight`` is a scalar.
    """

    format: str = CHECKPOINT_FORMAT
    config: PolicyConfig
    input_weights: list[list[float]]
    variational: list[list[list[float]]]
    output_weight: float
    frozen_groups: list[ParamGroup]
    seed: int
    step: int

    @classmethod
    def capture(
        cls, config: PolicyConfig, params: PolicyParams, *, seed: int, step: int
    ) -> PolicyCheckpoint:
        return cls(
            config=config,
            input_weights=params.input_weights.tolist(),
            variational=params.variational.tolist(),
            output_weight=params.output_weight,
            frozen_groups=sorted(params.frozen | config.frozen_groups),
            seed=seed,
            step=step,
        )

    def to_params(self) -> PolicyParams:
        params = PolicyParams(
            input_weights=np.asarray(self.input_weights, dtype=np.float64),
            variational=np.asarray(self.variational, dtype=np.float64),
            output_weight=self.output_weight,
            frozen=frozenset(self.frozen_groups),
        )
        check_params(self.config, params)
        return params


def save_policy(path: Path, checkpoint: PolicyCheckpoint) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(checkpoint.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def load_policy(path: Path) -> PolicyCheckpoint:
    if not path.is_file():
        msg = f"Policy checkpoint {path} does not exist"
        raise DataError(msg)
    return PolicyCheckpoint.model_validate_json(path.read_text(encoding="utf-8"))


__all__ = ["CHECKPOINT_FORMAT", "PolicyCheckpoint", "load_policy", "save_policy"]
