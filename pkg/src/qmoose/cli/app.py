"""Typer CLI wiring the qmoose pipelines."""

from __future__ import annotations

import logging
import math
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import TypeVar

import numpy as np
import typer
from pydantic import BaseModel, ValidationError

from qmoose import __version__
from qmoose.domain import EvalMode, FeatureVector
from qmoose.dynamics import ensemble_fingerprint, load_ensemble, save_ensemble, train_ensemble
from qmoose.exceptions import ConfigurationError, DataError, NumericError
from qmoose.harness import (
    LATENCY_GATE_MS,
    EpisodeTrace,
    bench_inference,
    binned_evaluation,
    surrogate_episode,
    world_episode,
    write_bin_report,
    write_latency_stats,
    write_trace,
)
from qmoose.policy import PolicyCheckpoint, QuantumPolicy, load_policy, save_policy
from qmoose.training import train_policy, write_train_report
from qmoose.world import Dataset, clean_dataset, generate_dataset, read_dataset, write_dataset

from .config import RunConfig, RunPaths, load_run_config
from .deps import get_settings

EXIT_CONFIGURATION = 1
EXIT_DATA = 3
EXIT_NUMERIC = 4
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

ModelT = TypeVar("ModelT", bound=BaseModel)

app = typer.Typer(help="Quantum-policy offline reinforcement learning toolkit")


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO), stream=sys.stderr, format=LOG_FORMAT
    )


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(f"qmoose {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False, "--version", callback=_version_callback, is_eager=True, help="Print the version"
    ),
) -> None:
    """Generate data, train dynamics and policies, evaluate and benchmark."""

    _configure_logging(get_settings().log_level)


@contextmanager
def _exit_on_error() -> Iterator[None]:
    """Translate library failures into documented exit codes."""

    try:
        yield
    except DataError as exc:
        typer.echo(f"Data error: {exc}", err=True)
        raise typer.Exit(code=EXIT_DATA) from exc
    except NumericError as exc:
        typer.echo(f"Numeric error: {exc}", err=True)
        raise typer.Exit(code=EXIT_NUMERIC) from exc
    except (ConfigurationError, ValidationError) as exc:
        typer.echo(f"Configuration error: {exc}", err=True)
        raise typer.Exit(code=EXIT_CONFIGURATION) from exc
    except OSError as exc:
        typer.echo(f"I/O error: {exc}", err=True)
        raise typer.Exit(code=EXIT_CONFIGURATION) from exc


def _override(model: ModelT, **changes: object) -> ModelT:
    """Copy of ``model`` with ``changes`` applied and validators re-run."""

    return type(model).model_validate({**model.model_dump(), **changes})


def _run_config(config_path: Path | None, seed: int | None) -> tuple[RunConfig, RunPaths]:
    settings = get_settings()
    run = load_run_config(config_path, seed=seed)
    if config_path is None and seed is None:
        run = run.model_copy(update={"seed": settings.default_seed})
    return run, run.paths.resolve(settings.artifacts_root)


def _workers(value: int | None) -> int:
    return value if value is not None else get_settings().workers


def _load_clean_dataset(path: Path, run: RunConfig) -> Dataset:
    return clean_dataset(read_dataset(path), run.world)


def _load_quantum_policy(path: Path) -> tuple[QuantumPolicy, PolicyCheckpoint]:
    checkpoint = load_policy(path)
    return QuantumPolicy(checkpoint.config, checkpoint.to_params()), checkpoint


def _centered_starts(n: int, seed: int, max_angle_degrees: float) -> list[FeatureVector]:
    rng = np.random.default_rng(seed)
    limit = math.radians(max_angle_degrees)
    return [
        FeatureVector.from_state(0.0, 0.0, float(rng.uniform(-limit, limit)), 0.0)
        for _ in range(n)
    ]


ConfigOption = typer.Option(None, "--config", help="JSON run configuration")
SeedOption = typer.Option(None, "--seed", help="Override the run seed")
WorkersOption = typer.Option(None, "--workers", min=1, help="Worker threads")


@app.command("show-settings")
def show_settings() -> None:
    """Print the resolved application settings."""

    settings = get_settings()
    typer.echo("Environment:\t" + settings.environment)
    typer.echo("Artifacts Root:\t" + str(settings.artifacts_root))
    typer.echo("Log Level:\t" + settings.log_level)
    typer.echo(f"Workers:\t{settings.workers}")
    typer.echo(f"Default Seed:\t{settings.default_seed}")


@app.command("gen-data")
def gen_data(
    episodes: int = typer.Option(200, min=1, help="Behaviour-policy episodes"),
    out: Path | None = typer.Option(None, "--out", help="Dataset CSV path"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
) -> None:
    """Generate an offline dataset with the behaviour policy."""

    with _exit_on_error():
        run, paths = _run_config(config, seed)
        target = out or paths.dataset
        dataset = generate_dataset(run.world, run.behavior, episodes, run.seed)
        write_dataset(target, dataset)
        typer.echo(
            f"Wrote {len(dataset)} records ({dataset.n_episodes} episodes) to {target}"
        )


@app.command("train-dynamics")
def train_dynamics(
    data: Path | None = typer.Option(None, "--data", help="Dataset CSV path"),
    k: int = typer.Option(20, "--k", min=1, help="Ensemble size"),
    out: Path | None = typer.Option(None, "--out", help="Ensemble directory"),
    epochs: int | None = typer.Option(None, "--epochs", min=1, help="Passes per model"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    workers: int | None = WorkersOption,
) -> None:
    """Train the transition-model ensemble on the cleaned dataset."""

    with _exit_on_error():
        run, paths = _run_config(config, seed)
        dynamics = run.dynamics
        if epochs is not None:
            dynamics = _override(dynamics, epochs=epochs)
        dataset = _load_clean_dataset(data or paths.dataset, run)
        fit = train_ensemble(dataset, k, dynamics, run.seed, workers=_workers(workers))
        target = out or paths.ensemble
        save_ensemble(target, fit)
        typer.echo(
            f"Trained {fit.ensemble.k} models, mean MSE "
            f"{float(np.mean(fit.train_mse)):.6f}, saved to {target}"
        )
        typer.echo(f"Fingerprint {ensemble_fingerprint(fit.ensemble)}")


@app.command("train-policy")
def train_policy_command(
    ensemble: Path | None = typer.Option(None, "--ensemble", help="Ensemble directory"),
    data: Path | None = typer.Option(None, "--data", help="Dataset CSV path"),
    out: Path | None = typer.Option(None, "--out", help="Policy checkpoint directory"),
    no_trainable_weights: bool = typer.Option(
        False, "--no-trainable-weights", help="Freeze input and output weights"
    ),
    epochs: int | None = typer.Option(None, "--epochs", min=0, help="Gradient steps"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
) -> None:
    """Optimise the quantum policy through imagined rollouts."""

    with _exit_on_error():
        run, paths = _run_config(config, seed)
        train = run.training()
        if epochs is not None:
            train = _override(train, epochs=epochs)
        policy_config = run.policy
        if no_trainable_weights:
            policy_config = policy_config.without_trainable_weights()
        models = load_ensemble(ensemble or paths.ensemble)
        dataset = _load_clean_dataset(data or paths.dataset, run)
        target = out or paths.policy_dir
        result = train_policy(models, dataset, train, policy_config, checkpoint_dir=target)
        final = save_policy(
            target / "policy.json",
            PolicyCheckpoint.capture(
                policy_config, result.params, seed=train.seed, step=train.epochs
            ),
        )
        report = write_train_report(target / "train_report.csv", result.report)
        typer.echo(f"Saved policy to {final} and report to {report}")
        if result.report.rows:
            typer.echo(f"Final loss {result.report.rows[-1].loss:.6f}")


def _report_traces(traces: list[EpisodeTrace], out: Path, prefix: str) -> None:
    for index, trace in enumerate(traces):
        write_trace(out / f"{prefix}_{index:02d}.csv", trace)
    steps = [trace.steps_balanced for trace in traces]
    typer.echo(f"Steps balanced per episode: {steps}")
    typer.echo(f"Mean steps balanced: {float(np.mean(steps)):.1f}")


@app.command("eval")
def evaluate(
    policy: Path | None = typer.Option(None, "--policy", help="Policy checkpoint JSON"),
    mode: EvalMode = typer.Option(EvalMode.SURROGATE, "--mode", help="Plant to evaluate on"),
    bins: bool = typer.Option(False, "--bins", help="Binned start-position evaluation"),
    latency_ms: float | None = typer.Option(
        None, "--latency-ms", min=0.0, help="Injected action delay"
    ),
    ensemble: Path | None = typer.Option(None, "--ensemble", help="Ensemble directory"),
    episodes: int = typer.Option(3, "--episodes", min=1, help="Episodes from centered starts"),
    max_steps: int | None = typer.Option(None, "--max-steps", min=1, help="Episode length"),
    out: Path | None = typer.Option(None, "--out", help="Report directory"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    workers: int | None = WorkersOption,
) -> None:
    """Evaluate a trained policy on the surrogate or the simulator."""

    with _exit_on_error():
        run, paths = _run_config(config, seed)
        latency = run.latency
        if latency_ms is not None:
            latency = _override(latency, fixed_delay_ms=latency_ms)
        quantum, _ = _load_quantum_policy(policy or paths.policy_dir / "policy.json")
        horizon = max_steps or run.train.eval_horizon
        target = out or paths.reports
        starts = _centered_starts(episodes, run.seed, run.bins.max_angle_degrees)
        if mode is EvalMode.SURROGATE:
            models = load_ensemble(ensemble or paths.ensemble)
            traces = [
                surrogate_episode(
                    quantum,
                    models,
                    start,
                    horizon,
                    member=index % models.k,
                    world=run.world,
                    latency=latency,
                    seed=run.seed + index,
                )
                for index, start in enumerate(starts)
            ]
            _report_traces(traces, target, "trace_surrogate")
        elif bins:
            bins_config = _override(run.bins, max_steps=horizon)
            report = binned_evaluation(
                quantum,
                run.world,
                bins_config,
                run.seed,
                latency=latency,
                workers=_workers(workers),
            )
            path = write_bin_report(target / "bins.csv", report)
            for stats in report.bins:
                typer.echo(
                    f"[{stats.start:+.3f}, {stats.end:+.3f}) mean {stats.mean_steps:.1f} "
                    f"min {stats.min_steps} max {stats.max_steps}"
                )
            typer.echo(f"Wrote bin report to {path}")
        else:
            traces = [
                world_episode(quantum, run.world, start, latency, horizon, seed=run.seed + index)
                for index, start in enumerate(starts)
            ]
            _report_traces(traces, target, "trace_world")


@app.command("bench")
def bench(
    policy: Path | None = typer.Option(None, "--policy", help="Policy checkpoint JSON"),
    trials: int = typer.Option(1000, "--trials", min=100, help="Measured calls"),
    warmup: int = typer.Option(10, "--warmup", min=0, help="Discarded calls"),
    enforce: bool = typer.Option(False, "--enforce", help="Fail when mean >= 15 ms"),
    out: Path | None = typer.Option(None, "--out", help="Latency CSV path"),
    config: Path | None = ConfigOption,
    seed: int | None = SeedOption,
) -> None:
    """Benchmark single-sample inference latency."""

    with _exit_on_error():
        run, paths = _run_config(config, seed)
        quantum, _ = _load_quantum_policy(policy or paths.policy_dir / "policy.json")
        stats = bench_inference(quantum, trials, warmup, seed=run.seed)
        path = write_latency_stats(out or paths.reports / "latency.csv", stats)
        typer.echo(
            f"trials={stats.n_trials} mean={stats.mean_ms:.3f}ms std={stats.std_ms:.3f}ms "
            f"p99={stats.p99_ms:.3f}ms"
        )
        for stage, value in stats.stages.items():
            typer.echo(f"{stage}={value:.3f}")
        typer.echo(f"Wrote latency stats to {path}")
    if enforce and stats.mean_ms >= LATENCY_GATE_MS:
        typer.echo(f"Mean latency {stats.mean_ms:.3f} ms exceeds {LATENCY_GATE_MS} ms", err=True)
        raise typer.Exit(code=1)


__all__ = ["app"]
