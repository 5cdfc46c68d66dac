from __future__ import annotations

import hashlib
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from qmoose.domain import FeatureVector
from qmoose.dynamics import TransitionSample
from qmoose.exceptions import ConfigurationError, DataError
from qmoose.world import (
    CSV_HEADER,
    WINDOW,
    BehaviorSpec,
    Dataset,
    DatasetRecord,
    PhysicalState,
    WorldConfig,
    clean_dataset,
    eligible_indices,
    feature_matrix,
    generate_dataset,
    physics_step,
    read_dataset,
    reward,
    sample_initial_indices,
    sample_initial_states,
    to_features,
    transition_arrays,
    write_dataset,
)


def _records(
    n: int, *, theta: float = 0.0, start_t: int = 0, done_last: bool = True
) -> list[DatasetRecord]:
    return [
        DatasetRecord(
            t=start_t + step,
            p=0.01 * step,
            p_dot=0.0,
            theta=theta,
            theta_dot=0.0,
            action=0.1 * (step % 5),
            reward=-0.01,
            done=done_last and step == n - 1,
        )
        for step in range(n)
    ]


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_single_episode_ends_with_done() -> None:
    dataset = generate_dataset(WorldConfig(), BehaviorSpec(), episodes=1, seed=0)

    assert 1 <= len(dataset) <= 500
    assert dataset.done[-1]
    assert dataset.done.sum() == 1
    np.testing.assert_array_equal(dataset.t, np.arange(len(dataset)))


def test_generation_requires_an_episode() -> None:
    with pytest.raises(ConfigurationError):
        generate_dataset(WorldConfig(), BehaviorSpec(), episodes=0, seed=0)


def test_generation_is_reproducible(tmp_path: Path) -> None:
    behavior = BehaviorSpec(max_episode_steps=50)
    first = write_dataset(tmp_path / "a.csv", generate_dataset(WorldConfig(), behavior, 5, 42))
    second = write_dataset(tmp_path / "b.csv", generate_dataset(WorldConfig(), behavior, 5, 42))
    other = write_dataset(tmp_path / "c.csv", generate_dataset(WorldConfig(), behavior, 5, 43))

    assert _digest(first) == _digest(second)
    assert _digest(first) != _digest(other)


def test_random_behavior_drops_the_pole_quickly() -> None:
    behavior = BehaviorSpec(random_fraction=1.0, max_episode_steps=200)
    dataset = generate_dataset(WorldConfig(), behavior, episodes=20, seed=1)

    lengths = np.bincount(dataset.episode_ids())

    assert dataset.n_episodes == 20
    assert np.mean(lengths < 200) >= 0.9


def test_records_hold_pre_step_state_and_post_step_reward() -> None:
    config = WorldConfig()
    dataset = generate_dataset(config, BehaviorSpec(max_episode_steps=30), episodes=1, seed=5)

    first, nxt = dataset.record(0), dataset.record(1)

    stepped = physics_step(
        PhysicalState(p=first.p, p_dot=first.p_dot, theta=first.theta, theta_dot=first.theta_dot),
        first.action,
        config,
    )

    assert not first.done
    assert stepped.as_tuple() == pytest.approx((nxt.p, nxt.p_dot, nxt.theta, nxt.theta_dot))
    assert first.reward == pytest.approx(
        reward(stepped.p, stepped.theta, stepped.theta_dot, config)
    )


def test_clean_dataset_is_idempotent(tiny_dataset: Dataset, tmp_path: Path) -> None:
    once = clean_dataset(tiny_dataset, WorldConfig())
    twice = clean_dataset(once, WorldConfig())

    assert _digest(write_dataset(tmp_path / "once.csv", once)) == _digest(
        write_dataset(tmp_path / "twice.csv", twice)
    )


def test_clean_drops_out_of_bounds_record() -> None:
    records = _records(6)
    records[2] = replace(records[2], p=4.8)

    cleaned = clean_dataset(Dataset.from_records(records), WorldConfig())

    assert len(cleaned) == 5
    assert cleaned.t.tolist() == [0, 1, 3, 4, 5]
    assert cleaned.done.tolist() == [False, True, False, False, True]
    assert cleaned.n_episodes == 2


def test_clean_splits_on_angle_jump() -> None:
    records = _records(6)
    records[3] = replace(records[3], theta=math.pi / 2)

    cleaned = clean_dataset(Dataset.from_records(records), WorldConfig())

    assert cleaned.t.tolist() == [0, 1, 2, 4, 5]
    assert cleaned.done.tolist() == [False, False, True, False, True]


def test_clean_closes_episode_on_step_gap() -> None:
    records = _records(3, done_last=False) + _records(3, start_t=10)

    cleaned = clean_dataset(Dataset.from_records(records), WorldConfig())

    assert len(cleaned) == 6
    assert cleaned.done.tolist() == [False, False, True, False, False, True]


def test_clean_keeps_episode_start_after_step_reset() -> None:
    records = _records(3, done_last=False) + _records(3, theta=2.0)

    cleaned = clean_dataset(Dataset.from_records(records), WorldConfig())

    assert cleaned.t.tolist() == [0, 1, 2, 0, 1, 2]
    assert cleaned.done.tolist() == [False, False, True, False, False, True]
    assert cleaned.n_episodes == 2


def test_clean_drops_non_finite_records() -> None:
    records = _records(4)
    records[1] = replace(records[1], theta=float("nan"))

    cleaned = clean_dataset(Dataset.from_records(records), WorldConfig())

    assert cleaned.t.tolist() == [0, 2, 3]
    assert cleaned.done.tolist() == [True, False, True]


def test_to_features_uses_action_history() -> None:
    window = _records(WINDOW, theta=math.pi / 2, done_last=False)
    window = [
        replace(r, action=action)
        for r, action in zip(window, (0.9, 0.9, 0.9, 0.9, 0.1, 0.2, 0.3, 0.7), strict=True)
    ]

    features = to_features(window)

    assert features.history == (0.1, 0.2, 0.3)
    assert features.cos_theta == pytest.approx(0.0, abs=1e-15)
    assert features.sin_theta == pytest.approx(1.0)
    assert features.p == window[-1].p


def test_to_features_rejects_bad_windows() -> None:
    with pytest.raises(DataError):
        to_features(_records(WINDOW - 1, done_last=False))
    crossing = _records(4) + _records(4, start_t=4)
    with pytest.raises(DataError):
        to_features(crossing)


def test_initial_states_are_distinct_and_seeded(tiny_dataset: Dataset) -> None:
    eligible = eligible_indices(tiny_dataset)
    indices = sample_initial_indices(tiny_dataset, 20, seed=4)

    assert len(set(indices.tolist())) == 20
    assert set(indices.tolist()) <= set(eligible.tolist())
    np.testing.assert_array_equal(indices, sample_initial_indices(tiny_dataset, 20, seed=4))
    states = sample_initial_states(tiny_dataset, 5, seed=4)
    assert all(isinstance(state, FeatureVector) for state in states)


def test_initial_state_requests_are_bounded(tiny_dataset: Dataset) -> None:
    n_eligible = len(eligible_indices(tiny_dataset))

    with pytest.raises(DataError):
        sample_initial_indices(tiny_dataset, n_eligible + 1, seed=0)
    with pytest.raises(DataError):
        sample_initial_indices(tiny_dataset, 0, seed=0)


def test_feature_matrix_matches_windows(tiny_dataset: Dataset) -> None:
    features = feature_matrix(tiny_dataset)
    index = int(eligible_indices(tiny_dataset)[3])

    expected = to_features(tiny_dataset.records(index - WINDOW + 1, index + 1))

    np.testing.assert_allclose(features[index], expected.to_array())


def test_transitions_carry_consistent_history(tiny_dataset: Dataset) -> None:
    states, actions, nexts = transition_arrays(tiny_dataset)

    assert states.shape == nexts.shape
    assert len(actions) == len(tiny_dataset) - tiny_dataset.n_episodes
    for row in range(0, len(actions), 37):
        TransitionSample(
            s_t=FeatureVector.from_array(states[row]),
            a_t=float(actions[row]),
            s_next=FeatureVector.from_array(nexts[row]),
        )


def test_transitions_require_pairs() -> None:
    with pytest.raises(DataError):
        transition_arrays(Dataset.from_records(_records(1)))


def test_csv_format(tmp_path: Path) -> None:
    dataset = Dataset.from_records(_records(3))
    path = write_dataset(tmp_path / "data.csv", dataset)

    lines = path.read_text(encoding="utf-8").splitlines()

    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[-1].endswith(",1")
    assert lines[1].endswith(",0")
    loaded = read_dataset(path)
    np.testing.assert_array_equal(loaded.p, dataset.p)
    np.testing.assert_array_equal(loaded.done, dataset.done)


def test_read_dataset_errors(tmp_path: Path) -> None:
    with pytest.raises(DataError):
        read_dataset(tmp_path / "missing.csv")
    bad_header = tmp_path / "header.csv"
    bad_header.write_text("t,p\n0,0.0\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_dataset(bad_header)
    bad_row = tmp_path / "row.csv"
    bad_row.write_text(",".join(CSV_HEADER) + "\n0,abc,0,0,0,0,0,0\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_dataset(bad_row)


@pytest.mark.parametrize("flag", ["yes", "2", ""])
def test_read_dataset_rejects_malformed_done_flag(tmp_path: Path, flag: str) -> None:
    path = tmp_path / "done.csv"
    path.write_text(",".join(CSV_HEADER) + f"\n0,0,0,0,0,0,0,{flag}\n", encoding="utf-8")

    with pytest.raises(DataError):
        read_dataset(path)
