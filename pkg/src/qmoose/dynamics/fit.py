"""Bootstrap ensemble training of transition models."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from qmoose.domain import PHYSICAL_DIM, FloatArray
from qmoose.exceptions import DataError
from qmoose.optim import AdamState, adam_update
from qmoose.world import Dataset, transition_arrays

from .models import (
    MIN_STD,
    NET_INPUT_DIM,
    Activation,
    DynamicsTrainConfig,
    EnsembleFit,
    TransitionEnsemble,
    TransitionNet,
)
from .net import net_inputs

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Standardization:
    in_mean: FloatArray
    in_std: FloatArray
    out_mean: FloatArray
    out_std: FloatArray

    @classmethod
    def fit(cls, inputs: FloatArray, targets: FloatArray) -> Standardization:
        return cls(
            in_mean=inputs.mean(axis=0),
            in_std=np.maximum(inputs.std(axis=0), MIN_STD),
            out_mean=targets.mean(axis=0),
            out_std=np.maximum(targets.std(axis=0), MIN_STD),
        )


def supervised_pairs(dataset: Dataset) -> tuple[FloatArray, FloatArray]:
    """``(batch, 9)`` net inputs and ``(batch, 5)`` physical deltas of every transition."""

    s_t, a_t, s_next = transition_arrays(dataset)
    return net_inputs(s_t, a_t), s_next[:, :PHYSICAL_DIM] - s_t[:, :PHYSICAL_DIM]


def _layer_shapes(config: DynamicsTrainConfig) -> list[tuple[int, int]]:
    sizes = [NET_INPUT_DIM, *([config.hidden_size] * config.hidden_layers), PHYSICAL_DIM]
    return list(zip(sizes[:-1], sizes[1:], strict=True))


def _init_vector(shapes: list[tuple[int, int]], rng: np.random.Generator) -> FloatArray:
    parts: list[FloatArray] = []
    for fan_in, fan_out in shapes:
        parts.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=fan_in * fan_out))
        parts.append(np.zeros(fan_out))
    return np.concatenate(parts)


def _unflatten(
    vector: FloatArray, shapes: list[tuple[int, int]]
) -> tuple[list[FloatArray], list[FloatArray]]:
    weights: list[FloatArray] = []
    biases: list[FloatArray] = []
    offset = 0
    for fan_in, fan_out in shapes:
        weights.append(vector[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out))
        offset += fan_in * fan_out
        biases.append(vector[offset : offset + fan_out])
        offset += fan_out
    return weights, biases


def _mse_and_grad(
    vector: FloatArray,
    shapes: list[tuple[int, int]],
    x: FloatArray,
    y: FloatArray,
    activation: Activation,
) -> tuple[float, FloatArray]:
    """Standardised MSE of one minibatch and its gradient w.r.t. the flat parameters."""

    weights, biases = _unflatten(vector, shapes)
    hidden = [x]
    h = x
    for w, b in zip(weights[:-1], biases[:-1], strict=True):
        z = h @ w + b
        h = np.tanh(z) if activation == "tanh" else z
        hidden.append(h)
    pred = h @ weights[-1] + biases[-1]
    residual = pred - y
    loss = float(np.mean(residual**2))

    grads: list[FloatArray] = []
    g = 2.0 * residual / residual.size
    for layer in range(len(weights) - 1, -1, -1):
        grads.append(g.sum(axis=0))
        grads.append((hidden[layer].T @ g).ravel())
        if layer > 0:
            g = g @ weights[layer].T
            if activation == "tanh":
                g = g * (1.0 - hidden[layer] ** 2)
    return loss, np.concatenate(grads[::-1])


def fit_transition_net(
    inputs: FloatArray,
    targets: FloatArray,
    stats: Standardization,
    config: DynamicsTrainConfig,
    seed: int,
) -> tuple[TransitionNet, float]:
    """Train one member on a bootstrap resample; returns the net and its final MSE."""

    rng = np.random.default_rng(seed)
    n = len(inputs)
    rows = rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
    x = (inputs[rows] - stats.in_mean) / stats.in_std
    y = (targets[rows] - stats.out_mean) / stats.out_std

    shapes = _layer_shapes(config)
    vector = _init_vector(shapes, rng)
    state = AdamState.zeros(vector.size)
    batch = min(config.batch_size, n)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            _, grad = _mse_and_grad(vector, shapes, x[idx], y[idx], config.activation)
            vector, state = adam_update(
                vector,
                grad,
                state,
                learning_rate=config.learning_rate,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.eps,
            )
    final_mse, _ = _mse_and_grad(vector, shapes, x, y, config.activation)
    weights, biases = _unflatten(vector.copy(), shapes)
    net = TransitionNet(
        weights=tuple(weights),
        biases=tuple(biases),
        in_mean=stats.in_mean,
        in_std=stats.in_std,
        out_mean=stats.out_mean,
        out_std=stats.out_std,
        activation=config.activation,
    )
    return net, final_mse


def member_seeds(seed: int, k: int) -> tuple[int, ...]:
    """Independent per-member seeds derived from one root seed."""

    return tuple(
        int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(k)
    )


def train_ensemble(
    dataset: Dataset,
    k: int,
    config: DynamicsTrainConfig,
    seed: int,
    *,
    workers: int = 1,
) -> EnsembleFit:
    """Fit ``k`` members, each on its own bootstrap resample with its own init seed."""

    if k < 1:
        msg = f"Ensemble size must be >= 1, got {k}"
        raise DataError(msg)
    if len(dataset) == 0:
        msg = "Cannot train dynamics on an empty dataset"
        raise DataError(msg)
    inputs, targets = supervised_pairs(dataset)
    if len(inputs) < config.min_transitions:
        msg = (
            f"Dataset holds {len(inputs)} transitions, at least {config.min_transitions} "
            "are required"
        )
        raise DataError(msg)
    return train_ensemble_arrays(inputs, targets, k, config, seed, workers=workers)


def train_ensemble_arrays(
    inputs: FloatArray,
    targets: FloatArray,
    k: int,
    config: DynamicsTrainConfig,
    seed: int,
    *,
    workers: int = 1,
) -> EnsembleFit:
    stats = Standardization.fit(inputs, targets)
    seeds = member_seeds(seed, k)
    logger.info(
        "Training %d transition models on %d transitions (workers=%d)", k, len(inputs), workers
    )

    def fit(member_seed: int) -> tuple[TransitionNet, float]:
        return fit_transition_net(inputs, targets, stats, config, member_seed)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(fit, seeds))
    for index, (_, mse) in enumerate(results):
        logger.info("Model %d/%d final standardised MSE %.6f", index + 1, k, mse)
    return EnsembleFit(
        ensemble=TransitionEnsemble(
            models=tuple(net for net, _ in results), seeds=seeds
        ),
        train_mse=tuple(mse for _, mse in results),
    )


__all__ = [
    "Standardization",
    "fit_transition_net",
    "member_seeds",
    "supervised_pairs",
    "train_ensemble",
    "train_ensemble_arrays",
]
