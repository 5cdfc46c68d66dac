"""Ground-truth cart-pole world, reward and offline datasets."""

from .dataset import (
    CSV_HEADER,
    WINDOW,
    Dataset,
    DatasetRecord,
    clean_dataset,
    eligible_indices,
    feature_matrix,
    generate_dataset,
    read_dataset,
    sample_initial_indices,
    sample_initial_states,
    to_features,
    transition_arrays,
    write_dataset,
)
from .models import BehaviorSpec, PhysicalState, RewardConfig, WorldConfig, wrap_angle
from .physics import (
    accelerations,
    feature_reward,
    mechanical_energy,
    physics_step,
    reward,
    termination,
)

__all__ = [
    "CSV_HEADER",
    "WINDOW",
    "BehaviorSpec",
    "Dataset",
    "DatasetRecord",
    "PhysicalState",
    "RewardConfig",
    "WorldConfig",
    "accelerations",
    "clean_dataset",
    "eligible_indices",
    "feature_matrix",
    "feature_reward",
    "generate_dataset",
    "mechanical_energy",
    "physics_step",
    "read_dataset",
    "reward",
    "sample_initial_indices",
    "sample_initial_states",
    "termination",
    "to_features",
    "transition_arrays",
    "wrap_angle",
]
