from __future__ import annotations

import hashlib
import importlib
import json
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from qmoose import __version__
from qmoose.cli.app import app
from qmoose.cli.deps import reset_settings
from qmoose.exceptions import NumericError
from qmoose.policy import load_policy

app_module = importlib.import_module("qmoose.cli.app")

RUN_CONFIG = {
    "seed": 11,
    "behavior": {"max_episode_steps": 100},
    "dynamics": {"hidden_size": 8, "epochs": 1, "min_transitions": 50},
    "policy": {"n_qubits": 1, "n_layers": 1, "feature_indices": [3]},
    "train": {
        "horizon": 5,
        "epochs": 2,
        "ensemble_batch": 4,
        "n_init": 10,
        "checkpoint_every": 1,
    },
    "bins": {"runs_per_bin": 2, "bin_width_units": 25.0},
}


def _env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> Path:
    root = tmp_path / "artifacts"
    monkeypatch.setenv("QMOOSE_ARTIFACTS_ROOT", str(root))
    monkeypatch.setenv("QMOOSE_ENV", "test")
    monkeypatch.setenv("QMOOSE_WORKERS", "1")
    reset_settings()
    return root


def _config(tmp_path: Path) -> str:
    path = tmp_path / "run.json"
    path.write_text(json.dumps(RUN_CONFIG), encoding="utf-8")
    return str(path)


def _pipeline(runner: CliRunner, config: str, *policy_args: str) -> None:
    steps = [
        ["gen-data", "--episodes", "8", "--config", config],
        ["train-dynamics", "--k", "2", "--config", config],
        ["train-policy", "--config", config, *policy_args],
    ]
    for args in steps:
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output


def test_cli_version() -> None:
    result = CliRunner().invoke(app, ["--version"])

    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_cli_show_settings(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    root = _env(monkeypatch, tmp_path)

    result = CliRunner().invoke(app, ["show-settings"])

    assert result.exit_code == 0
    assert "Environment:\ttest" in result.stdout
    assert str(root) in result.stdout
    assert "Workers:\t1" in result.stdout


def test_cli_gen_data_is_reproducible(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    _env(monkeypatch, tmp_path)
    config = _config(tmp_path)
    runner = CliRunner()
    digests = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        result = runner.invoke(
            app, ["gen-data", "--episodes", "3", "--out", str(out), "--config", config]
        )
        assert result.exit_code == 0, result.output
        assert "3 episodes" in result.stdout
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())

    assert digests[0] == digests[1]


def test_cli_gen_data_rejects_zero_episodes(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path
) -> None:
    _env(monkeypatch, tmp_path)

    result = CliRunner().invoke(app, ["gen-data", "--episodes", "0"])

    assert result.exit_code == 2


def test_cli_missing_config_is_a_configuration_error(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path
) -> None:
    _env(monkeypatch, tmp_path)

    result = CliRunner().invoke(app, ["gen-data", "--config", str(tmp_path / "nope.json")])

    assert result.exit_code == 1


def test_cli_numeric_failures_exit_four(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    _env(monkeypatch, tmp_path)

    def exploding(*args: object, **kwargs: object) -> None:
        msg = "Integration produced non-finite state"
        raise NumericError(msg)

    monkeypatch.setattr(app_module, "generate_dataset", exploding)

    result = CliRunner().invoke(app, ["gen-data", "--episodes", "1"])

    assert result.exit_code == 4


def test_cli_train_dynamics(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    root = _env(monkeypatch, tmp_path)
    config = _config(tmp_path)
    runner = CliRunner()
    assert runner.invoke(app, ["gen-data", "--episodes", "8", "--config", config]).exit_code == 0

    result = runner.invoke(app, ["train-dynamics", "--k", "2", "--config", config])

    assert result.exit_code == 0, result.output
    assert "Trained 2 models" in result.stdout
    assert "Fingerprint" in result.stdout
    ensemble_dir = root / "models" / "ensemble"
    assert (ensemble_dir / "manifest.json").is_file()
    assert (ensemble_dir / "model_00.json").is_file()
    assert (ensemble_dir / "model_01.json").is_file()


def test_cli_train_dynamics_without_data(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    _env(monkeypatch, tmp_path)

    result = CliRunner().invoke(app, ["train-dynamics", "--k", "2"])

    assert result.exit_code == 3


def test_cli_train_policy_writes_checkpoints(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path
) -> None:
    root = _env(monkeypatch, tmp_path)
    runner = CliRunner()

    _pipeline(runner, _config(tmp_path))

    policy_dir = root / "models" / "policy"
    assert sorted(path.name for path in policy_dir.glob("policy_step*.json")) == [
        "policy_step000000.json",
        "policy_step000001.json",
        "policy_step000002.json",
    ]
    final = load_policy(policy_dir / "policy.json")
    assert final.step == 2
    assert final.seed == 11
    lines = (policy_dir / "train_report.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3


def test_cli_train_policy_with_frozen_weights(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path
) -> None:
    root = _env(monkeypatch, tmp_path)

    _pipeline(CliRunner(), _config(tmp_path), "--no-trainable-weights")

    params = load_policy(root / "models" / "policy" / "policy.json").to_params()
    assert np.all(params.input_weights == 1.0)
    assert params.output_weight == 1.0


def test_cli_train_policy_zero_epochs(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    root = _env(monkeypatch, tmp_path)
    runner = CliRunner()
    config = _config(tmp_path)
    _pipeline(runner, config)

    result = runner.invoke(
        app, ["train-policy", "--config", config, "--epochs", "0", "--out", str(tmp_path / "p0")]
    )

    assert result.exit_code == 0, result.output
    assert "Final loss" not in result.stdout
    assert load_policy(tmp_path / "p0" / "policy.json").step == 0
    assert (root / "models" / "policy" / "policy.json").is_file()


def test_cli_eval_surrogate_and_world(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    root = _env(monkeypatch, tmp_path)
    runner = CliRunner()
    config = _config(tmp_path)
    _pipeline(runner, config)

    surrogate = runner.invoke(
        app, ["eval", "--config", config, "--episodes", "2", "--max-steps", "20"]
    )
    world = runner.invoke(
        app,
        ["eval", "--config", config, "--mode", "world", "--episodes", "2", "--max-steps", "20"],
    )

    assert surrogate.exit_code == 0, surrogate.output
    assert "Mean steps balanced" in surrogate.stdout
    assert world.exit_code == 0, world.output
    reports = root / "reports"
    assert (reports / "trace_surrogate_00.csv").is_file()
    assert (reports / "trace_surrogate_01.csv").is_file()
    assert (reports / "trace_world_01.csv").is_file()


def test_cli_eval_bins(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    root = _env(monkeypatch, tmp_path)
    runner = CliRunner()
    config = _config(tmp_path)
    _pipeline(runner, config)

    result = runner.invoke(
        app,
        ["eval", "--config", config, "--mode", "world", "--bins", "--max-steps", "15"],
    )

    assert result.exit_code == 0, result.output
    assert result.stdout.count(") mean ") == 4
    lines = (root / "reports" / "bins.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5


def test_cli_eval_without_policy(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    _env(monkeypatch, tmp_path)

    result = CliRunner().invoke(app, ["eval", "--mode", "world"])

    assert result.exit_code == 3


def test_cli_bench(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    root = _env(monkeypatch, tmp_path)
    runner = CliRunner()
    config = _config(tmp_path)
    _pipeline(runner, config)

    too_few = runner.invoke(app, ["bench", "--config", config, "--trials", "10"])
    result = runner.invoke(app, ["bench", "--config", config, "--trials", "100"])

    assert too_few.exit_code == 2
    assert result.exit_code == 0, result.output
    assert "trials=100" in result.stdout
    assert "circuit_ms=" in result.stdout
    assert (root / "reports" / "latency.csv").is_file()


def test_cli_eval_rejects_latency_below_jitter(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path
) -> None:
    _env(monkeypatch, tmp_path)
    path = tmp_path / "jitter.json"
    path.write_text(
        json.dumps({"latency": {"fixed_delay_ms": 60.0, "jitter_ms": 50.0, "inference_ms": 0.0}}),
        encoding="utf-8",
    )

    result = CliRunner().invoke(
        app, ["eval", "--mode", "world", "--config", str(path), "--latency-ms", "10"]
    )

    assert result.exit_code == 1
    assert "Configuration error" in result.output
