"""Closed-loop evaluation records and configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Annotated, Protocol, Self

from pydantic import Field, model_validator

from qmoose.domain import DomainModel, FeatureVector, TerminationCause
from qmoose.exceptions import ConfigurationError
from qmoose.world import PhysicalState

NonNegative = Annotated[float, Field(ge=0.0)]

CLOUD_COMMUNICATION_MS = 700.0
CLOUD_QPU_MS = 3000.0


class Policy(Protocol):
    """Anything that maps policy features to an action."""

    def act(self, features: FeatureVector) -> float: ...


class LatencyModel(DomainModel):
    """Delay between issuing a policy request and its action becoming available.

    ``inference_ms`` fixes the policy's own compute time; when it is ``None`` the harness
    measures wall-clock inference instead.
    """

    fixed_delay_ms: NonNegative = 0.0
    jitter_ms: NonNegative = 0.0
    inference_ms: NonNegative | None = None

    @model_validator(mode="after")
    def check_span(self) -> Self:
        if self.fixed_delay_ms - self.jitter_ms < 0:
            msg = (
                f"jitter_ms ({self.jitter_ms}) must not exceed fixed_delay_ms "
                f"({self.fixed_delay_ms})"
            )
            raise ValueError(msg)
        return self

    @classmethod
    def local(cls) -> LatencyModel:
        return cls()

    @classmethod
    def cloud_qpu(
        cls, communication_ms: float = CLOUD_COMMUNICATION_MS, qpu_ms: float = CLOUD_QPU_MS
    ) -> LatencyModel:
        """Round trip to a hosted quantum processor; queueing is not modelled."""

        return cls(fixed_delay_ms=communication_ms + qpu_ms)


@dataclass(frozen=True, slots=True)
class StepRecord:
    """One control period: the state reached, the features acted on, the applied action."""

    t: int
    state: PhysicalState
    features: FeatureVector
    action: float
    reward: float
    inference_ms: float


@dataclass(frozen=True, slots=True)
class EpisodeTrace:
    steps: tuple[StepRecord, ...]
    steps_balanced: int
    termination_cause: TerminationCause
    max_steps: int

    def __post_init__(self) -> None:
        if not 0 <= self.steps_balanced <= self.max_steps:
            msg = f"steps_balanced {self.steps_balanced} outside [0, {self.max_steps}]"
            raise ConfigurationError(msg)
        if any(step.inference_ms < 0 for step in self.steps):
            msg = "inference_ms must be non-negative"
            raise ConfigurationError(msg)

    @property
    def rewards(self) -> list[float]:
        return [step.reward for step in self.steps]

    @property
    def actions(self) -> list[float]:
        return [step.action for step in self.steps]


class BinsConfig(DomainModel):
    """Start-position slots across the track, in track units spanning the full track."""

    track_units: Annotated[float, Field(gt=0.0)] = 100.0
    bin_width_units: Annotated[float, Field(gt=0.0)] = 10.0
    runs_per_bin: Annotated[int, Field(ge=1)] = 10
    max_angle_degrees: NonNegative = 3.0
    max_steps: Annotated[int, Field(ge=1)] = 200

    @property
    def n_bins(self) -> int:
        count = self.track_units / self.bin_width_units
        if not math.isclose(count, round(count), rel_tol=0.0, abs_tol=1e-9):
            msg = (
                f"Bin width {self.bin_width_units} does not divide the track "
                f"({self.track_units} units)"
            )
            raise ConfigurationError(msg)
        return round(count)

    def edges(self, track_limit: float) -> list[tuple[float, float]]:
        """``[start, end)`` position ranges in metres tiling ``[-track_limit, track_limit]``."""

        n = self.n_bins
        width = 2.0 * track_limit / n
        return [(-track_limit + i * width, -track_limit + (i + 1) * width) for i in range(n)]


@dataclass(frozen=True, slots=True)
class BinStats:
    start: float
    end: float
    steps: tuple[int, ...]

    @property
    def runs(self) -> int:
        return len(self.steps)

    @property
    def mean_steps(self) -> float:
        return sum(self.steps) / len(self.steps)

    @property
    def min_steps(self) -> int:
        return min(self.steps)

    @property
    def max_steps(self) -> int:
        return max(self.steps)


@dataclass(frozen=True, slots=True)
class BinReport:
    bins: tuple[BinStats, ...]

    def __post_init__(self) -> None:
        for left, right in zip(self.bins, self.bins[1:], strict=False):
            if not math.isclose(left.end, right.start, abs_tol=1e-12):
                msg = f"Bins overlap or leave a gap at {left.end} / {right.start}"
                raise ConfigurationError(msg)

    @property
    def means(self) -> list[float]:
        return [b.mean_steps for b in self.bins]


@dataclass(frozen=True, slots=True)
class LatencyStats:
    """Per-call ``act`` latency in milliseconds."""

    samples: tuple[float, ...]
    mean_ms: float
    std_ms: float
    p99_ms: float
    stages: dict[str, float] = field(default_factory=dict)

    @property
    def n_trials(self) -> int:
        return len(self.samples)


__all__ = [
    "BinReport",
    "BinStats",
    "BinsConfig",
    "EpisodeTrace",
    "LatencyModel",
    "LatencyStats",
    "Policy",
    "StepRecord",
]
