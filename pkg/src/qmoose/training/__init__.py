"""Model-based offline policy optimisation."""

from .models import BatchLoss, ReportRow, RolloutResult, TrainConfig, TrainReport, WeightStats
from .optim import adam_step, init_adam
from .rollout import (
    BatchRollout,
    RewardFn,
    default_reward,
    loss_and_grad,
    rollout,
    rollout_batch,
    sample_pairs,
)
from .trainer import (
    REPORT_HEADER,
    TrainResult,
    checkpoint_path,
    initial_state_matrix,
    train_policy,
    weight_stats,
    write_train_report,
)

__all__ = [
    "REPORT_HEADER",
    "BatchLoss",
    "BatchRollout",
    "ReportRow",
    "RewardFn",
    "RolloutResult",
    "TrainConfig",
    "TrainReport",
    "TrainResult",
    "WeightStats",
    "adam_step",
    "checkpoint_path",
    "default_reward",
    "init_adam",
    "initial_state_matrix",
    "loss_and_grad",
    "rollout",
    "rollout_batch",
    "sample_pairs",
    "train_policy",
    "weight_stats",
    "write_train_report",
]
