"""Offline dataset generation, cleaning, sampling and CSV I/O."""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qmoose.domain import (
    A_PREV1,
    A_PREV2,
    A_PREV3,
    COS_THETA,
    FEATURE_DIM,
    P,
    P_DOT,
    SIN_THETA,
    THETA_DOT,
    BoolArray,
    FeatureVector,
    FloatArray,
    IntArray,
)
from qmoose.exceptions import ConfigurationError, DataError

from .models import BehaviorSpec, PhysicalState, WorldConfig, wrap_angle
from .physics import physics_step, reward, termination

logger = logging.getLogger(__name__)

CSV_HEADER = ("t", "p", "p_dot", "theta", "theta_dot", "action", "reward", "done")
WINDOW = 8
ANGLE_JUMP_LIMIT = 1.0


@dataclass(frozen=True, slots=True)
class DatasetRecord:
    """One logged control step: state at ``t``, the action taken, the reward it earned."""

    t: int
    p: float
    p_dot: float
    theta: float
    theta_dot: float
    action: float
    reward: float
    done: bool


@dataclass(frozen=True, slots=True)
class Dataset:
    """Column-oriented offline dataset; episodes are delimited by ``done`` flags."""

    t: IntArray
    p: FloatArray
    p_dot: FloatArray
    theta: FloatArray
    theta_dot: FloatArray
    action: FloatArray
    reward: FloatArray
    done: BoolArray

    def __post_init__(self) -> None:
        sizes = {len(column) for column in self.columns()}
        if len(sizes) > 1:
            msg = f"Dataset columns have mismatched lengths {sorted(sizes)}"
            raise DataError(msg)

    def __len__(self) -> int:
        return len(self.t)

    def columns(self) -> tuple[np.ndarray, ...]:  # type: ignore[type-arg]
        return (
            self.t,
            self.p,
            self.p_dot,
            self.theta,
            self.theta_dot,
            self.action,
            self.reward,
            self.done,
        )

    @classmethod
    def from_records(cls, records: Sequence[DatasetRecord]) -> Dataset:
        return cls(
            t=np.array([r.t for r in records], dtype=np.int64),
            p=np.array([r.p for r in records], dtype=np.float64),
            p_dot=np.array([r.p_dot for r in records], dtype=np.float64),
            theta=np.array([r.theta for r in records], dtype=np.float64),
            theta_dot=np.array([r.theta_dot for r in records], dtype=np.float64),
            action=np.array([r.action for r in records], dtype=np.float64),
            reward=np.array([r.reward for r in records], dtype=np.float64),
            done=np.array([r.done for r in records], dtype=np.bool_),
        )

    def record(self, index: int) -> DatasetRecord:
        return DatasetRecord(
            t=int(self.t[index]),
            p=float(self.p[index]),
            p_dot=float(self.p_dot[index]),
            theta=float(self.theta[index]),
            theta_dot=float(self.theta_dot[index]),
            action=float(self.action[index]),
            reward=float(self.reward[index]),
            done=bool(self.done[index]),
        )

    def records(self, start: int = 0, stop: int | None = None) -> list[DatasetRecord]:
        end = len(self) if stop is None else stop
        return [self.record(index) for index in range(start, end)]

    def subset(self, mask_or_index: np.ndarray) -> Dataset:  # type: ignore[type-arg]
        return Dataset(*(column[mask_or_index] for column in self.columns()))

    def with_done(self, done: BoolArray) -> Dataset:
        return Dataset(
            self.t, self.p, self.p_dot, self.theta, self.theta_dot, self.action, self.reward, done
        )

    def episode_ids(self) -> IntArray:
        """Episode number of every record (a record after a ``done`` starts a new one)."""

        starts = np.concatenate([[0], self.done[:-1].astype(np.int64)]) if len(self) else []
        return np.cumsum(np.asarray(starts, dtype=np.int64))

    def episode_positions(self) -> IntArray:
        """Index of every record within its episode."""

        ids = self.episode_ids()
        positions = np.zeros(len(self), dtype=np.int64)
        for index in range(1, len(self)):
            if ids[index] == ids[index - 1]:
                positions[index] = positions[index - 1] + 1
        return positions

    @property
    def n_episodes(self) -> int:
        return int(self.episode_ids()[-1]) + 1 if len(self) else 0


def generate_dataset(
    config: WorldConfig, behavior: BehaviorSpec, episodes: int, seed: int
) -> Dataset:
    """Run the behaviour policy from randomised starts and log every transition."""

    if episodes < 1:
        msg = f"episodes must be >= 1, got {episodes}"
        raise ConfigurationError(msg)
    streams = np.random.SeedSequence(seed).spawn(episodes)
    records: list[DatasetRecord] = []
    for stream in streams:
        records.extend(_run_behavior_episode(config, behavior, np.random.default_rng(stream)))
    dataset = Dataset.from_records(records)
    logger.info(
        "Generated %d records over %d episodes (seed=%d)", len(dataset), episodes, seed
    )
    return dataset


def _run_behavior_episode(
    config: WorldConfig, behavior: BehaviorSpec, rng: np.random.Generator
) -> list[DatasetRecord]:
    state = PhysicalState(
        p=float(rng.uniform(-behavior.start_position, behavior.start_position)),
        p_dot=float(rng.uniform(-behavior.start_velocity, behavior.start_velocity)),
        theta=float(rng.uniform(-behavior.start_angle, behavior.start_angle)),
        theta_dot=float(rng.uniform(-behavior.start_velocity, behavior.start_velocity)),
    )
    k_p, k_p_dot, k_theta, k_theta_dot = behavior.gains
    records: list[DatasetRecord] = []
    for step in range(behavior.max_episode_steps):
        if rng.random() < behavior.random_fraction:
            action = float(rng.uniform(-1.0, 1.0))
        else:
            control = (
                k_p * state.p
                + k_p_dot * state.p_dot
                + k_theta * state.theta
                + k_theta_dot * state.theta_dot
            )
            action = control + behavior.action_noise_std * float(rng.standard_normal())
        action = min(1.0, max(-1.0, action))
        next_state = physics_step(state, action, config)
        finished = termination(next_state.p, next_state.theta, config) is not None
        records.append(
            DatasetRecord(
                t=step,
                p=state.p,
                p_dot=state.p_dot,
                theta=state.theta,
                theta_dot=state.theta_dot,
                action=action,
                reward=reward(next_state.p, next_state.theta, next_state.theta_dot, config),
                done=finished or step == behavior.max_episode_steps - 1,
            )
        )
        if finished:
            break
        state = next_state
    return records


def _record_is_valid(dataset: Dataset, index: int, config: WorldConfig) -> bool:
    values = (
        dataset.p[index],
        dataset.p_dot[index],
        dataset.theta[index],
        dataset.theta_dot[index],
        dataset.action[index],
        dataset.reward[index],
    )
    if not all(math.isfinite(float(value)) for value in values):
        return False
    return abs(float(dataset.p[index])) <= config.track_limit


def clean_dataset(raw: Dataset, config: WorldConfig) -> Dataset:
    """Drop out-of-bounds, non-finite and angle-discontinuous records.

    Episodes are closed (``done`` set on the last kept record) wherever a record is dropped
    or the step counter skips.
    """

    done = raw.done.copy()
    keep = np.zeros(len(raw), dtype=np.bool_)
    previous: int | None = None
    dropped_invalid = 0
    dropped_jumps = 0
    for index in range(len(raw)):
        if not _record_is_valid(raw, index, config):
            dropped_invalid += 1
            if previous is not None:
                done[previous] = True
            previous = None
            continue
        if previous is not None and raw.t[index] != raw.t[previous] + 1:
            done[previous] = True
            previous = None
        if previous is not None:
            jump = wrap_angle(float(raw.theta[index] - raw.theta[previous]))
            if abs(jump) >= ANGLE_JUMP_LIMIT:
                dropped_jumps += 1
                done[previous] = True
                previous = None
                continue
        keep[index] = True
        previous = None if done[index] else index
    if dropped_invalid or dropped_jumps:
        logger.info(
            "Cleaning dropped %d invalid and %d discontinuous records of %d",
            dropped_invalid,
            dropped_jumps,
            len(raw),
        )
    return raw.with_done(done).subset(keep)


def to_features(window: Sequence[DatasetRecord]) -> FeatureVector:
    """Policy features of the last record, with the three previous actions of the window."""

    if len(window) != WINDOW:
        msg = f"A feature window needs {WINDOW} records, got {len(window)}"
        raise DataError(msg)
    for earlier, later in zip(window[:-1], window[1:], strict=True):
        if earlier.done or later.t != earlier.t + 1:
            msg = f"Window crosses an episode boundary between t={earlier.t} and t={later.t}"
            raise DataError(msg)
    last = window[-1]
    return FeatureVector.from_state(
        last.p,
        last.p_dot,
        last.theta,
        last.theta_dot,
        history=(window[-4].action, window[-3].action, window[-2].action),
    )


def eligible_indices(dataset: Dataset) -> IntArray:
    """Records that end a full in-episode window of ``WINDOW`` steps."""

    return np.flatnonzero(dataset.episode_positions() >= WINDOW - 1)


def sample_initial_indices(dataset: Dataset, n: int, seed: int) -> IntArray:
    eligible = eligible_indices(dataset)
    if n < 1 or n > len(eligible):
        msg = f"Requested {n} initial states but only {len(eligible)} records are eligible"
        raise DataError(msg)
    rng = np.random.default_rng(seed)
    return np.asarray(rng.choice(eligible, size=n, replace=False), dtype=np.int64)


def sample_initial_states(dataset: Dataset, n: int, seed: int) -> list[FeatureVector]:
    """Draw ``n`` distinct eligible records and convert them to policy features."""

    return [
        to_features(dataset.records(int(index) - WINDOW + 1, int(index) + 1))
        for index in sample_initial_indices(dataset, n, seed)
    ]


def feature_matrix(dataset: Dataset) -> FloatArray:
    """Features of every record; action history before an episode start is zero."""

    features = np.zeros((len(dataset), FEATURE_DIM), dtype=np.float64)
    features[:, P] = dataset.p
    features[:, P_DOT] = dataset.p_dot
    features[:, COS_THETA] = np.cos(dataset.theta)
    features[:, SIN_THETA] = np.sin(dataset.theta)
    features[:, THETA_DOT] = dataset.theta_dot
    positions = dataset.episode_positions()
    for lag, column in ((1, A_PREV1), (2, A_PREV2), (3, A_PREV3)):
        valid = positions >= lag
        shifted = np.zeros(len(dataset), dtype=np.float64)
        shifted[lag:] = dataset.action[:-lag]
        features[:, column] = np.where(valid, shifted, 0.0)
    return features


def transition_arrays(dataset: Dataset) -> tuple[FloatArray, FloatArray, FloatArray]:
    """``(s_t, a_t, s_next)`` for every consecutive in-episode pair of records."""

    if len(dataset) < 2:
        msg = "Dataset holds no transitions"
        raise DataError(msg)
    features = feature_matrix(dataset)
    ids = dataset.episode_ids()
    pairs = np.flatnonzero((ids[:-1] == ids[1:]) & ~dataset.done[:-1])
    if len(pairs) == 0:
        msg = "Dataset holds no transitions"
        raise DataError(msg)
    return features[pairs], dataset.action[pairs], features[pairs + 1]


def _format_float(value: float) -> str:
    return repr(float(value))


def write_dataset(path: Path, dataset: Dataset) -> Path:
    """Write the UTF-8 CSV ingestion format (shortest round-trip floats, done as 0/1)."""

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for index in range(len(dataset)):
            writer.writerow(
                (
                    int(dataset.t[index]),
                    _format_float(dataset.p[index]),
                    _format_float(dataset.p_dot[index]),
                    _format_float(dataset.theta[index]),
                    _format_float(dataset.theta_dot[index]),
                    _format_float(dataset.action[index]),
                    _format_float(dataset.reward[index]),
                    int(bool(dataset.done[index])),
                )
            )
    return path


def read_dataset(path: Path) -> Dataset:
    if not path.is_file():
        msg = f"Dataset file {path} does not exist"
        raise DataError(msg)
    records: list[DatasetRecord] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            msg = f"Dataset {path} has header {header}, expected {','.join(CSV_HEADER)}"
            raise DataError(msg)
        for line_number, row in enumerate(reader, start=2):
            try:
                t, p, p_dot, theta, theta_dot, action, rew, done = row
                if done.strip() not in {"0", "1"}:
                    msg = f"Invalid done flag {done!r}"
                    raise ValueError(msg)
                records.append(
                    DatasetRecord(
                        t=int(t),
                        p=float(p),
                        p_dot=float(p_dot),
                        theta=float(theta),
                        theta_dot=float(theta_dot),
                        action=float(action),
                        reward=float(rew),
                        done=done.strip() == "1",
                    )
                )
            except ValueError as exc:
                msg = f"Malformed dataset row {line_number} in {path}: {row}"
                raise DataError(msg) from exc
    return Dataset.from_records(records)


__all__ = [
    "CSV_HEADER",
    "WINDOW",
    "Dataset",
    "DatasetRecord",
    "clean_dataset",
    "eligible_indices",
    "feature_matrix",
    "generate_dataset",
    "read_dataset",
    "sample_initial_indices",
    "sample_initial_states",
    "to_features",
    "transition_arrays",
    "write_dataset",
]
