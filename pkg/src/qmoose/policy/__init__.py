"""Variational quantum circuit policy."""

from .ansatz import AnsatzLayout, ansatz_layout, build_circuit
from .checkpoint import PolicyCheckpoint, load_policy, save_policy
from .models import NormalizationSpec, PolicyConfig, PolicyGradient, PolicyParams
from .vqc import (
    PolicyJacobian,
    QuantumPolicy,
    StageTimings,
    act,
    act_batch,
    init_policy,
    jacobian_batch,
    normalize_array,
    normalize_features,
    policy_gradient,
    weight_groups,
)

__all__ = [
    "AnsatzLayout",
    "NormalizationSpec",
    "PolicyCheckpoint",
    "PolicyConfig",
    "PolicyGradient",
    "PolicyJacobian",
    "PolicyParams",
    "QuantumPolicy",
    "StageTimings",
    "act",
    "act_batch",
    "ansatz_layout",
    "build_circuit",
    "init_policy",
    "jacobian_batch",
    "load_policy",
    "normalize_array",
    "normalize_features",
    "policy_gradient",
    "save_policy",
    "weight_groups",
]
