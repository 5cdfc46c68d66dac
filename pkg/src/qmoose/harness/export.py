"""CSV exports of traces, bin reports and latency statistics."""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path

from .models import BinReport, EpisodeTrace, LatencyStats

TRACE_HEADER = ("t", "p", "p_dot", "theta", "theta_dot", "action", "reward", "inference_ms")
BINS_HEADER = ("bin_start", "bin_end", "mean_steps", "min_steps", "max_steps")
LATENCY_HEADER = (
    "n_trials",
    "mean_ms",
    "std_ms",
    "p99_ms",
    "preprocess_ms",
    "circuit_ms",
    "postprocess_ms",
)


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_trace(path: Path, trace: EpisodeTrace) -> Path:
    return _write(
        path,
        TRACE_HEADER,
        (
            (
                step.t,
                repr(step.state.p),
                repr(step.state.p_dot),
                repr(step.state.theta),
                repr(step.state.theta_dot),
                repr(step.action),
                repr(step.reward),
                f"{step.inference_ms:.6f}",
            )
            for step in trace.steps
        ),
    )


def write_bin_report(path: Path, report: BinReport) -> Path:
    return _write(
        path,
        BINS_HEADER,
        (
            (repr(b.start), repr(b.end), repr(b.mean_steps), b.min_steps, b.max_steps)
            for b in report.bins
        ),
    )


def write_latency_stats(path: Path, stats: LatencyStats) -> Path:
    stages = [stats.stages.get(name, "") for name in LATENCY_HEADER[4:]]
    return _write(
        path,
        LATENCY_HEADER,
        [(stats.n_trials, stats.mean_ms, stats.std_ms, stats.p99_ms, *stages)],
    )


__all__ = [
    "BINS_HEADER",
    "LATENCY_HEADER",
    "TRACE_HEADER",
    "write_bin_report",
    "write_latency_stats",
    "write_trace",
]
