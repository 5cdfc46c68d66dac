"""Closed-loop evaluation, latency injection and inference benchmarking."""

from .bench import LATENCY_GATE_MS, LATENCY_TARGET_MS, MIN_TRIALS, bench_inference
from .episodes import binned_evaluation, run_episode, surrogate_episode, world_episode
from .export import write_bin_report, write_latency_stats, write_trace
from .models import (
    BinReport,
    BinsConfig,
    BinStats,
    EpisodeTrace,
    LatencyModel,
    LatencyStats,
    Policy,
    StepRecord,
)
from .plants import Plant, SurrogatePlant, WorldPlant

__all__ = [
    "LATENCY_GATE_MS",
    "LATENCY_TARGET_MS",
    "MIN_TRIALS",
    "BinReport",
    "BinStats",
    "BinsConfig",
    "EpisodeTrace",
    "LatencyModel",
    "LatencyStats",
    "Plant",
    "Policy",
    "StepRecord",
    "SurrogatePlant",
    "WorldPlant",
    "bench_inference",
    "binned_evaluation",
    "run_episode",
    "surrogate_episode",
    "world_episode",
    "write_bin_report",
    "write_latency_stats",
    "write_trace",
]
