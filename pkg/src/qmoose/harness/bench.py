"""Inference latency benchmark."""

from __future__ import annotations

import logging
import time

import numpy as np

from qmoose.domain import FeatureVector
from qmoose.exceptions import ConfigurationError
from qmoose.policy import QuantumPolicy, StageTimings

from .models import LatencyStats, Policy

logger = logging.getLogger(__name__)

MIN_TRIALS = 100
LATENCY_GATE_MS = 15.0
LATENCY_TARGET_MS = 5.0


def random_features(n: int, seed: int) -> list[FeatureVector]:
    """Features spread over the operating envelope of the cart-pole."""

    rng = np.random.default_rng(seed)
    return [
        FeatureVector.from_state(
            float(rng.uniform(-2.4, 2.4)),
            float(rng.uniform(-3.0, 3.0)),
            float(rng.uniform(-0.4, 0.4)),
            float(rng.uniform(-4.0, 4.0)),
            history=(
                float(rng.uniform(-1.0, 1.0)),
                float(rng.uniform(-1.0, 1.0)),
                float(rng.uniform(-1.0, 1.0)),
            ),
        )
        for _ in range(n)
    ]


def _stats(samples: list[float], stages: dict[str, float]) -> LatencyStats:
    array = np.asarray(samples, dtype=np.float64)
    return LatencyStats(
        samples=tuple(samples),
        mean_ms=float(np.mean(array)),
        std_ms=float(np.std(array)),
        p99_ms=float(np.percentile(array, 99)),
        stages=stages,
    )


def bench_inference(
    policy: Policy, n_trials: int = 1000, warmup: int = 10, *, seed: int = 0
) -> LatencyStats:
    """Time ``n_trials`` single-sample ``act`` calls after ``warmup`` discarded calls.

    Quantum policies also report the mean preprocess, circuit and postprocess stage times.
    """

    if n_trials < MIN_TRIALS:
        msg = f"n_trials must be >= {MIN_TRIALS}, got {n_trials}"
        raise ConfigurationError(msg)
    if warmup < 0:
        msg = f"warmup must be >= 0, got {warmup}"
        raise ConfigurationError(msg)
    features = random_features(warmup + n_trials, seed)
    samples: list[float] = []
    timings: list[StageTimings] = []
    quantum = isinstance(policy, QuantumPolicy)
    for index, sample in enumerate(features):
        if quantum:
            raw = sample.to_array()
            started = time.perf_counter()
            _, stage = policy.timed_act(raw)
            elapsed = (time.perf_counter() - started) * 1e3
        else:
            started = time.perf_counter()
            policy.act(sample)
            elapsed = (time.perf_counter() - started) * 1e3
        if index >= warmup:
            samples.append(elapsed)
            if quantum:
                timings.append(stage)
    stages: dict[str, float] = {}
    if timings:
        stages = {
            "preprocess_ms": float(np.mean([s.preprocess_ms for s in timings])),
            "circuit_ms": float(np.mean([s.circuit_ms for s in timings])),
            "postprocess_ms": float(np.mean([s.postprocess_ms for s in timings])),
        }
    stats = _stats(samples, stages)
    logger.info(
        "Inference latency over %d trials: mean %.3f ms, std %.3f ms, p99 %.3f ms",
        stats.n_trials,
        stats.mean_ms,
        stats.std_ms,
        stats.p99_ms,
    )
    return stats


__all__ = [
    "LATENCY_GATE_MS",
    "LATENCY_TARGET_MS",
    "MIN_TRIALS",
    "bench_inference",
    "random_features",
]
