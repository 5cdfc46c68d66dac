"""Differentiable imagined rollouts through the frozen transition ensemble."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import partial

import numpy as np

from qmoose.domain import FEATURE_DIM, FeatureVector, FloatArray, IntArray, ModelExpectation
from qmoose.dynamics import (
    MemberCache,
    TransitionEnsemble,
    TransitionNet,
    ensemble_backward,
    ensemble_forward,
    net_inputs,
    step_features_backward,
    step_features_batch,
)
from qmoose.dynamics.net import MIN_RADIUS
from qmoose.exceptions import DataError
from qmoose.policy import PolicyJacobian, QuantumPolicy
from qmoose.world import WorldConfig, feature_reward

from .models import BatchLoss, RolloutResult, TrainConfig

logger = logging.getLogger(__name__)

RewardFn = Callable[[FloatArray], tuple[FloatArray, FloatArray]]


def default_reward(world: WorldConfig) -> RewardFn:
    return partial(feature_reward, config=world)


@dataclass(frozen=True, slots=True)
class _Step:
    jac: PolicyJacobian
    cache: MemberCache
    next_states: FloatArray
    radius: FloatArray
    reward_grad: FloatArray
    live: FloatArray


@dataclass(frozen=True, slots=True)
class BatchRollout:
    """Per-row trajectories of a batch of rollouts; ``grads`` has shape ``(batch, n_params)``."""

    states: FloatArray
    actions: FloatArray
    rewards: FloatArray
    live: FloatArray
    returns: FloatArray
    grads: FloatArray
    truncated: IntArray


def rollout_batch(
    policy: QuantumPolicy,
    ensemble: TransitionEnsemble,
    members: IntArray,
    starts: FloatArray,
    config: TrainConfig,
    *,
    reward_fn: RewardFn | None = None,
    with_grad: bool = True,
) -> BatchRollout:
    """Roll row ``i`` of ``starts`` through ``ensemble.models[members[i]]`` for ``horizon`` steps.

    Rows whose predicted state turns non-finite, leaves ``divergence_bound`` or loses its
    ``(cos, sin)`` norm stop contributing rewards and gradient from that step on.
    """

    rewards_of = reward_fn or default_reward(config.world)
    batch = len(starts)
    horizon = config.horizon
    states = np.zeros((horizon, batch, FEATURE_DIM), dtype=np.float64)
    actions = np.zeros((horizon, batch), dtype=np.float64)
    rewards = np.zeros((horizon, batch), dtype=np.float64)
    live = np.zeros((horizon, batch), dtype=np.float64)
    alive = np.ones(batch, dtype=np.bool_)
    discounts = config.gamma ** np.arange(horizon, dtype=np.float64)
    steps: list[_Step] = []

    current = starts.astype(np.float64, copy=True)
    for t in range(horizon):
        jac = policy.jacobian(current)
        delta, cache = ensemble_forward(ensemble, members, net_inputs(current, jac.actions))
        with np.errstate(all="ignore"):
            nxt, radius = step_features_batch(current, jac.actions, delta)
            values, reward_grad = rewards_of(nxt)
        bad = (
            ~np.all(np.isfinite(nxt), axis=1)
            | np.any(np.abs(nxt) > config.divergence_bound, axis=1)
            | (radius < MIN_RADIUS)
            | ~np.isfinite(values)
        )
        step_live = alive & ~bad
        nxt[~step_live] = current[~step_live]
        states[t] = current
        actions[t] = jac.actions
        rewards[t] = np.where(step_live, values, 0.0)
        live[t] = step_live
        if with_grad:
            steps.append(
                _Step(
                    jac=jac,
                    cache=cache,
                    next_states=nxt,
                    radius=np.where(step_live, radius, 1.0),
                    reward_grad=np.where(step_live[:, None], reward_grad, 0.0),
                    live=step_live.astype(np.float64),
                )
            )
        alive = step_live
        current = nxt

    returns = discounts @ rewards
    n_params = policy.params.n_params
    grads = np.zeros((batch, n_params), dtype=np.float64)
    if with_grad:
        costate = np.zeros((batch, FEATURE_DIM), dtype=np.float64)
        for t in range(horizon - 1, -1, -1):
            step = steps[t]
            upstream = (costate + discounts[t] * step.reward_grad) * step.live[:, None]
            d_state, d_action, d_delta = step_features_backward(
                step.next_states, step.radius, upstream
            )
            d_inputs = ensemble_backward(ensemble, step.cache, d_delta)
            d_state += d_inputs[:, :FEATURE_DIM]
            d_action += d_inputs[:, FEATURE_DIM]
            grads += d_action[:, None] * step.jac.params
            costate = d_state + d_action[:, None] * step.jac.features

    truncated = np.flatnonzero(live.min(axis=0) < 1.0)
    return BatchRollout(
        states=np.swapaxes(states, 0, 1),
        actions=actions.T,
        rewards=rewards.T,
        live=live.T,
        returns=returns,
        grads=grads,
        truncated=truncated,
    )


def rollout(
    policy: QuantumPolicy,
    model: TransitionNet,
    s0: FeatureVector,
    config: TrainConfig,
    *,
    reward_fn: RewardFn | None = None,
) -> RolloutResult:
    """One ``horizon``-step trajectory through ``model`` with its return gradient."""

    result = rollout_batch(
        policy,
        TransitionEnsemble(models=(model,), seeds=(0,)),
        np.zeros(1, dtype=np.int64),
        s0.to_array()[None, :],
        config,
        reward_fn=reward_fn,
    )
    length = int(result.live[0].sum())
    truncated = len(result.truncated) > 0
    if truncated:
        logger.warning("Rollout truncated after %d of %d steps", length, config.horizon)
    return RolloutResult(
        states=result.states[0, :length],
        actions=result.actions[0, :length],
        rewards=result.rewards[0, :length],
        discounted_return=float(result.returns[0]),
        grad=result.grads[0],
        truncated=truncated,
    )


def sample_pairs(
    n_states: int, ensemble_size: int, config: TrainConfig, rng: np.random.Generator
) -> tuple[IntArray, IntArray]:
    """Initial-state rows and ensemble members of one minibatch."""

    starts = rng.integers(0, n_states, size=config.ensemble_batch)
    if config.model_expectation is ModelExpectation.FULL:
        return np.repeat(starts, ensemble_size), np.tile(np.arange(ensemble_size), len(starts))
    return starts, rng.integers(0, ensemble_size, size=config.ensemble_batch)


def loss_and_grad(
    policy: QuantumPolicy,
    ensemble: TransitionEnsemble,
    init_states: FloatArray,
    config: TrainConfig,
    rng: np.random.Generator,
    *,
    reward_fn: RewardFn | None = None,
) -> BatchLoss:
    """Negative mean discounted return over sampled ``(initial state, model)`` pairs."""

    if len(init_states) == 0:
        msg = "loss_and_grad needs at least one initial state"
        raise DataError(msg)
    rows, members = sample_pairs(len(init_states), ensemble.k, config, rng)
    result = rollout_batch(
        policy, ensemble, members, init_states[rows], config, reward_fn=reward_fn
    )
    if len(result.truncated):
        logger.warning(
            "%d of %d rollouts truncated on divergence", len(result.truncated), len(rows)
        )
    return BatchLoss(
        loss=-float(np.mean(result.returns)),
        grad=-np.mean(result.grads, axis=0),
        returns=result.returns,
        truncated=len(result.truncated),
    )


__all__ = [
    "BatchRollout",
    "RewardFn",
    "default_reward",
    "loss_and_grad",
    "rollout",
    "rollout_batch",
    "sample_pairs",
]
