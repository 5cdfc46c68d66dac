"""Offline policy optimisation loop, weight statistics and report export."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qmoose.domain import FloatArray
from qmoose.dynamics import TransitionEnsemble
from qmoose.optim import clip_by_global_norm
from qmoose.policy import (
    PolicyCheckpoint,
    PolicyConfig,
    PolicyParams,
    QuantumPolicy,
    init_policy,
    save_policy,
)
from qmoose.world import Dataset, sample_initial_states

from .models import ReportRow, TrainConfig, TrainReport, WeightStats
from .optim import adam_step, init_adam
from .rollout import RewardFn, loss_and_grad

logger = logging.getLogger(__name__)

REPORT_HEADER = (
    "step",
    "loss",
    "mean_abs_input_w",
    "mean_abs_variational",
    "mean_abs_output_w",
    "wall_ms",
)


def weight_stats(params: PolicyParams) -> WeightStats:
    return WeightStats(
        input=float(np.mean(np.abs(params.input_weights))),
        variational=float(np.mean(np.abs(params.variational))),
        output=abs(params.output_weight),
    )


def checkpoint_path(directory: Path, step: int) -> Path:
    return directory / f"policy_step{step:06d}.json"


@dataclass(frozen=True, slots=True)
class TrainResult:
    params: PolicyParams
    report: TrainReport
    initial_params: PolicyParams


def initial_state_matrix(dataset: Dataset, config: TrainConfig) -> FloatArray:
    states = sample_initial_states(dataset, config.n_init, config.seed)
    return np.stack([state.to_array() for state in states])


def train_policy(
    ensemble: TransitionEnsemble,
    dataset: Dataset,
    config: TrainConfig,
    policy_config: PolicyConfig | None = None,
    *,
    checkpoint_dir: Path | None = None,
    reward_fn: RewardFn | None = None,
) -> TrainResult:
    """Optimise a fresh policy against the frozen ensemble.

    Initial states are drawn once; each epoch is one minibatch gradient step. Rows of the
    report (and checkpoints, when ``checkpoint_dir`` is given) are emitted every
    ``checkpoint_every`` steps and at the last step.
    """

    pconfig = policy_config or PolicyConfig()
    init_states = initial_state_matrix(dataset, config)
    initial = init_policy(pconfig, config.seed)
    params = initial
    state = init_adam(params)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])
    rows: list[ReportRow] = []
    logger.info(
        "Training policy: %d params, %d epochs, %d initial states, %d-model ensemble",
        params.n_params,
        config.epochs,
        len(init_states),
        ensemble.k,
    )
    if checkpoint_dir is not None:
        save_policy(
            checkpoint_path(checkpoint_dir, 0),
            PolicyCheckpoint.capture(pconfig, params, seed=config.seed, step=0),
        )

    started = time.perf_counter()
    for step in range(1, config.epochs + 1):
        batch = loss_and_grad(
            QuantumPolicy(pconfig, params),
            ensemble,
            init_states,
            config,
            rng,
            reward_fn=reward_fn,
        )
        grad, norm = clip_by_global_norm(batch.grad, config.grad_clip)
        params, state = adam_step(params, grad, state, config)
        if step % config.checkpoint_every == 0 or step == config.epochs:
            stats = weight_stats(params)
            wall_ms = (time.perf_counter() - started) * 1e3
            rows.append(ReportRow(step=step, loss=batch.loss, weights=stats, wall_ms=wall_ms))
            logger.info(
                "step=%d loss=%.6f grad_norm=%.4f |w_in|=%.4f |theta|=%.4f |w_out|=%.4f",
                step,
                batch.loss,
                norm,
                stats.input,
                stats.variational,
                stats.output,
            )
            if checkpoint_dir is not None:
                save_policy(
                    checkpoint_path(checkpoint_dir, step),
                    PolicyCheckpoint.capture(pconfig, params, seed=config.seed, step=step),
                )
    return TrainResult(params=params, report=TrainReport(tuple(rows)), initial_params=initial)


def write_train_report(path: Path, report: TrainReport) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in report.rows:
            writer.writerow(
                (
                    row.step,
                    repr(row.loss),
                    repr(row.weights.input),
                    repr(row.weights.variational),
                    repr(row.weights.output),
                    f"{row.wall_ms:.3f}",
                )
            )
    return path


__all__ = [
    "REPORT_HEADER",
    "TrainResult",
    "checkpoint_path",
    "initial_state_matrix",
    "train_policy",
    "weight_stats",
    "write_train_report",
]
