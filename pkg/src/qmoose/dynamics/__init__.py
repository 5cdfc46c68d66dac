"""Ensemble of learned transition models."""

from .checkpoint import EnsembleManifest, load_ensemble, save_ensemble
from .fit import Standardization, supervised_pairs, train_ensemble, train_ensemble_arrays
from .models import (
    NET_INPUT_DIM,
    DynamicsTrainConfig,
    EnsembleFit,
    TransitionEnsemble,
    TransitionNet,
    TransitionSample,
)
from .net import (
    MemberCache,
    backward_batch,
    ensemble_backward,
    ensemble_disagreement,
    ensemble_fingerprint,
    ensemble_forward,
    ensemble_predictions,
    forward_batch,
    net_backward,
    net_forward,
    net_inputs,
    step_features,
    step_features_backward,
    step_features_batch,
)

__all__ = [
    "NET_INPUT_DIM",
    "DynamicsTrainConfig",
    "EnsembleFit",
    "EnsembleManifest",
    "MemberCache",
    "Standardization",
    "TransitionEnsemble",
    "TransitionNet",
    "TransitionSample",
    "backward_batch",
    "ensemble_backward",
    "ensemble_disagreement",
    "ensemble_fingerprint",
    "ensemble_forward",
    "ensemble_predictions",
    "forward_batch",
    "load_ensemble",
    "net_backward",
    "net_forward",
    "net_inputs",
    "save_ensemble",
    "step_features",
    "step_features_backward",
    "step_features_batch",
    "supervised_pairs",
    "train_ensemble",
    "train_ensemble_arrays",
]
