"""Closed-loop episodes with latency injection and binned start-position evaluation."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from qmoose.domain import FeatureVector, TerminationCause
from qmoose.dynamics import TransitionEnsemble
from qmoose.world import PhysicalState, WorldConfig, reward, termination

from .models import (
    BinReport,
    BinsConfig,
    BinStats,
    EpisodeTrace,
    LatencyModel,
    Policy,
    StepRecord,
)
from .plants import Plant, SurrogatePlant, WorldPlant

logger = logging.getLogger(__name__)

READY_TOLERANCE_S = 1e-9


def _as_features(start: PhysicalState | FeatureVector) -> FeatureVector:
    if isinstance(start, FeatureVector):
        return start
    return FeatureVector.from_state(start.p, start.p_dot, start.theta, start.theta_dot)


def _timed_action(
    policy: Policy, features: FeatureVector, latency: LatencyModel
) -> tuple[float, float]:
    started = time.perf_counter()
    action = float(policy.act(features))
    measured = (time.perf_counter() - started) * 1e3
    return action, measured if latency.inference_ms is None else latency.inference_ms


def run_episode(
    policy: Policy,
    plant: Plant,
    start: PhysicalState | FeatureVector,
    latency: LatencyModel,
    max_steps: int,
    *,
    seed: int = 0,
) -> EpisodeTrace:
    """Close the loop for up to ``max_steps`` control periods.

    A request issued at step ``j`` becomes available at ``j * dt + (inference + delay) / 1000``
    seconds. Each period applies the newest available action, zero before the first one
    arrives. Logged states are the states reached after each applied action.
    """

    rng = np.random.default_rng(seed)
    dt = plant.world.dt
    plant.reset(_as_features(start))
    pending: list[tuple[int, float, float]] = []
    newest = -1
    applied = 0.0
    steps: list[StepRecord] = []
    balanced = max_steps
    cause = TerminationCause.MAX_STEPS
    for t in range(max_steps):
        observed = plant.observe()
        action, inference_ms = _timed_action(policy, observed, latency)
        jitter = (
            float(rng.uniform(-latency.jitter_ms, latency.jitter_ms)) if latency.jitter_ms else 0.0
        )
        delay_ms = max(0.0, latency.fixed_delay_ms + jitter)
        pending.append((t, t * dt + (inference_ms + delay_ms) / 1e3, action))

        now = t * dt + READY_TOLERANCE_S
        waiting: list[tuple[int, float, float]] = []
        for request, ready, value in pending:
            if ready <= now:
                if request > newest:
                    newest, applied = request, value
            elif request > newest:
                waiting.append((request, ready, value))
        pending = waiting

        plant.step(applied)
        state = plant.physical_state()
        steps.append(
            StepRecord(
                t=t,
                state=state,
                features=observed,
                action=applied,
                reward=reward(state.p, state.theta, state.theta_dot, plant.world),
                inference_ms=inference_ms,
            )
        )
        failure = termination(state.p, state.theta, plant.world)
        if failure is not None:
            balanced, cause = t, failure
            break
    return EpisodeTrace(
        steps=tuple(steps), steps_balanced=balanced, termination_cause=cause, max_steps=max_steps
    )


def world_episode(
    policy: Policy,
    world: WorldConfig,
    start: PhysicalState | FeatureVector,
    latency: LatencyModel,
    max_steps: int,
    *,
    seed: int = 0,
) -> EpisodeTrace:
    plant = WorldPlant(world, np.random.default_rng([seed, 1]))
    return run_episode(policy, plant, start, latency, max_steps, seed=seed)


def surrogate_episode(
    policy: Policy,
    ensemble: TransitionEnsemble,
    s0: FeatureVector,
    max_steps: int,
    *,
    member: int | None = 0,
    world: WorldConfig | None = None,
    latency: LatencyModel | None = None,
    seed: int = 0,
) -> EpisodeTrace:
    """Roll the policy through one ensemble member (``member=None`` cycles through all)."""

    models = ensemble.models if member is None else (ensemble.models[member],)
    plant = SurrogatePlant(models, world or WorldConfig(), round_robin=member is None)
    return run_episode(
        policy,
        plant,
        s0,
        latency or LatencyModel(inference_ms=0.0),
        max_steps,
        seed=seed,
    )


def binned_evaluation(
    policy: Policy,
    world: WorldConfig,
    bins: BinsConfig,
    seed: int,
    *,
    latency: LatencyModel | None = None,
    workers: int = 1,
) -> BinReport:
    """``runs_per_bin`` ground-truth episodes per start-position slot.

    Starts are uniform within each slot with ``|theta_0| <= max_angle_degrees`` and zero
    velocities. Every run has its own seed stream.
    """

    edges = bins.edges(world.track_limit)
    lat = latency or LatencyModel(inference_ms=0.0)
    max_angle = math.radians(bins.max_angle_degrees)
    streams = np.random.SeedSequence(seed).spawn(len(edges) * bins.runs_per_bin)
    jobs: list[tuple[PhysicalState, int]] = []
    for index, stream in enumerate(streams):
        low, high = edges[index // bins.runs_per_bin]
        rng = np.random.default_rng(stream)
        start = PhysicalState(
            p=float(rng.uniform(low, high)),
            p_dot=0.0,
            theta=float(rng.uniform(-max_angle, max_angle)),
            theta_dot=0.0,
        )
        jobs.append((start, int(rng.integers(0, 2**31 - 1))))

    def run(job: tuple[PhysicalState, int]) -> int:
        start, run_seed = job
        trace = world_episode(policy, world, start, lat, bins.max_steps, seed=run_seed)
        return trace.steps_balanced

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run, jobs))
    stats = tuple(
        BinStats(
            start=low,
            end=high,
            steps=tuple(results[i * bins.runs_per_bin : (i + 1) * bins.runs_per_bin]),
        )
        for i, (low, high) in enumerate(edges)
    )
    report = BinReport(stats)
    logger.info(
        "Binned evaluation: %d bins x %d runs, mean steps %s",
        len(edges),
        bins.runs_per_bin,
        ", ".join(f"{mean:.1f}" for mean in report.means),
    )
    return report


__all__ = ["binned_evaluation", "run_episode", "surrogate_episode", "world_episode"]
