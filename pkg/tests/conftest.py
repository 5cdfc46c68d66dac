from __future__ import annotations

import sys
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

# Ensure the src/ directory is importable when tests run via `uv run pytest`.
sys.path.append(str(Path(__file__).resolve().parents[1] / "src"))

from qmoose.domain import SIN_THETA, THETA_DOT, FeatureVector  # noqa: E402
from qmoose.dynamics import TransitionEnsemble, TransitionNet  # noqa: E402
from qmoose.policy import PolicyConfig  # noqa: E402
from qmoose.world import BehaviorSpec, Dataset, WorldConfig, generate_dataset  # noqa: E402

NetFactory = Callable[..., TransitionNet]


def build_net(
    seed: int,
    *,
    hidden: int = 6,
    layers: int = 2,
    scale: float = 0.3,
    out_std: float = 0.01,
    activation: str = "tanh",
) -> TransitionNet:
    rng = np.random.default_rng(seed)
    sizes = [9, *([hidden] * layers), 5]
    weights = tuple(
        rng.normal(0.0, scale, size=(fan_in, fan_out))
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:], strict=True)
    )
    biases = tuple(rng.normal(0.0, scale, size=fan_out) for fan_out in sizes[1:])
    return TransitionNet(
        weights=weights,
        biases=biases,
        in_mean=np.zeros(9),
        in_std=np.ones(9),
        out_mean=np.zeros(5),
        out_std=np.full(5, out_std),
        activation=activation,  # type: ignore[arg-type]
    )


def zero_net() -> TransitionNet:
    sizes = [9, 4, 5]
    return TransitionNet(
        weights=tuple(np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:], strict=True)),
        biases=tuple(np.zeros(b) for b in sizes[1:]),
        in_mean=np.zeros(9),
        in_std=np.ones(9),
        out_mean=np.zeros(5),
        out_std=np.ones(5),
    )


@pytest.fixture
def make_net() -> NetFactory:
    return build_net


@pytest.fixture
def small_ensemble() -> TransitionEnsemble:
    return TransitionEnsemble(models=(build_net(1), build_net(2)), seeds=(1, 2))


@pytest.fixture
def zero_ensemble() -> TransitionEnsemble:
    return TransitionEnsemble(models=(zero_net(),), seeds=(0,))


@pytest.fixture
def one_qubit_config() -> PolicyConfig:
    return PolicyConfig(n_qubits=1, n_layers=1, feature_indices=(SIN_THETA,), action_clip=0.0)


@pytest.fixture
def two_qubit_config() -> PolicyConfig:
    return PolicyConfig(
        n_qubits=2, n_layers=2, feature_indices=(SIN_THETA, THETA_DOT), action_clip=0.0
    )


@pytest.fixture
def start_features() -> FeatureVector:
    return FeatureVector.from_state(0.1, -0.05, 0.04, 0.2, history=(0.1, -0.2, 0.05))


@pytest.fixture(scope="session")
def tiny_dataset() -> Dataset:
    return generate_dataset(WorldConfig(), BehaviorSpec(max_episode_steps=80), episodes=8, seed=3)
