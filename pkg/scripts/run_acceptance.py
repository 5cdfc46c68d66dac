"""Experiment-scale acceptance checks with a pass/fail summary table."""

from __future__ import annotations

import hashlib
import logging
import math
import tempfile
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import NamedTuple

import numpy as np
import typer

from qmoose.domain import Axis, FeatureVector, GateKind
from qmoose.dynamics import DynamicsTrainConfig, TransitionEnsemble, train_ensemble
from qmoose.harness import (
    LATENCY_GATE_MS,
    LATENCY_TARGET_MS,
    BinsConfig,
    LatencyModel,
    bench_inference,
    binned_evaluation,
    surrogate_episode,
    world_episode,
)
from qmoose.policy import PolicyConfig, QuantumPolicy, init_policy
from qmoose.quantum import (
    Circuit,
    GateOp,
    apply_cnot,
    apply_rotation,
    expectation_z,
    grad_adjoint,
    grad_parameter_shift,
    new_state,
    run_circuit,
)
from qmoose.quantum.statevector import NORM_TOLERANCE
from qmoose.training import TrainConfig, TrainReport, WeightStats, rollout, train_policy
from qmoose.world import (
    BehaviorSpec,
    Dataset,
    WorldConfig,
    clean_dataset,
    generate_dataset,
    write_dataset,
)

logger = logging.getLogger(__name__)

app = typer.Typer(help="Run the seeded acceptance experiments")

BALANCE_STEPS = 200
DELAYS_MS = (0.0, 100.0, 500.0, 3700.0)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


class SeedOutcome(NamedTuple):
    seed: int
    surrogate_tw: list[int]
    surrogate_frozen: list[int]
    centre_means: list[float]
    edge_means: list[float]
    delay_means: list[float]
    weights_tw: WeightStats | None
    weights_frozen: WeightStats | None


def _random_circuit(rng: np.random.Generator) -> Circuit:
    n_qubits = int(rng.integers(1, 9))
    n_layers = int(rng.integers(1, 3))
    ops: list[GateOp] = []
    param_id = 0
    for _ in range(n_layers):
        for qubit in range(n_qubits):
            for kind in (GateKind.RZ, GateKind.RY, GateKind.RZ):
                ops.append(GateOp(kind=kind, target=qubit, param_id=param_id))
                param_id += 1
        if n_qubits > 1:
            ops.extend(
                GateOp(kind=GateKind.CNOT, target=(q + 1) % n_qubits, control=q)
                for q in range(n_qubits)
            )
    return Circuit(n_qubits=n_qubits, ops=tuple(ops), n_params=param_id)


def check_gradients(n_circuits: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    h = 1e-6
    for _ in range(n_circuits):
        circuit = _random_circuit(rng)
        params = rng.uniform(-math.pi, math.pi, circuit.n_params)
        shift = grad_parameter_shift(circuit, params)
        adjoint = grad_adjoint(circuit, params)
        fd = np.empty_like(params)
        for k in range(circuit.n_params):
            up, down = params.copy(), params.copy()
            up[k] += h
            down[k] -= h
            fd[k] = (run_circuit(circuit, up) - run_circuit(circuit, down)) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(shift))))
        worst = max(
            worst,
            float(np.max(np.abs(shift - adjoint))) / scale,
            float(np.max(np.abs(shift - fd))) / scale,
        )
    return CheckResult(
        "gradient agreement", worst < 1e-6, f"{n_circuits} circuits, worst rel {worst:.2e}"
    )


def check_statevector(n_sequences: int, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_norm = 0.0
    bounded = True
    axes = (Axis.X, Axis.Y, Axis.Z)
    for _ in range(n_sequences):
        n_qubits = int(rng.integers(1, 9))
        state = new_state(n_qubits)
        for _ in range(int(rng.integers(1, 40))):
            if n_qubits > 1 and rng.random() < 0.3:
                control, target = rng.choice(n_qubits, size=2, replace=False)
                state = apply_cnot(state, int(control), int(target))
            else:
                axis = axes[int(rng.integers(3))]
                qubit = int(rng.integers(n_qubits))
                state = apply_rotation(state, axis, qubit, float(rng.uniform(-math.pi, math.pi)))
        worst_norm = max(worst_norm, abs(state.norm - 1.0))
        bounded = bounded and all(
            -1.0 <= expectation_z(state, q) <= 1.0 for q in range(n_qubits)
        )
    return CheckResult(
        "statevector invariants",
        worst_norm < NORM_TOLERANCE and bounded,
        f"{n_sequences} sequences, worst norm drift {worst_norm:.2e}",
    )


def check_latency(trials: int, seed: int) -> CheckResult:
    config = PolicyConfig()
    stats = bench_inference(QuantumPolicy(config, init_policy(config, seed)), trials, seed=seed)
    target = "met" if stats.mean_ms < LATENCY_TARGET_MS else "missed"
    return CheckResult(
        "inference latency",
        stats.mean_ms < LATENCY_GATE_MS,
        f"mean {stats.mean_ms:.3f} ms, p99 {stats.p99_ms:.3f} ms, {LATENCY_TARGET_MS} ms target "
        f"{target}",
    )


def _dataset_digest(world: WorldConfig, episodes: int, seed: int, directory: Path) -> str:
    path = write_dataset(
        directory / f"dataset_{seed}.csv",
        generate_dataset(world, BehaviorSpec(), episodes, seed),
    )
    return hashlib.sha256(path.read_bytes()).hexdigest()


def check_reproducibility(seed: int) -> CheckResult:
    world = WorldConfig()
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        a = _dataset_digest(world, 5, seed, Path(first))
        b = _dataset_digest(world, 5, seed, Path(second))
    return CheckResult("reproducibility", a == b, f"dataset sha256 {a[:12]}")


def _centered_starts(n: int, seed: int) -> list[FeatureVector]:
    rng = np.random.default_rng(seed)
    limit = math.radians(3.0)
    return [
        FeatureVector.from_state(0.0, 0.0, float(rng.uniform(-limit, limit)), 0.0)
        for _ in range(n)
    ]


def _surrogate_steps(
    policy: QuantumPolicy, ensemble: TransitionEnsemble, starts: Sequence[FeatureVector]
) -> list[int]:
    return [
        surrogate_episode(policy, ensemble, start, BALANCE_STEPS, member=None).steps_balanced
        for start in starts
    ]


def _world_mean(
    policy: QuantumPolicy, world: WorldConfig, latency: LatencyModel, seed: int
) -> float:
    traces = [
        world_episode(policy, world, start, latency, BALANCE_STEPS, seed=seed)
        for start in _centered_starts(5, seed + 1)
    ]
    return float(np.mean([trace.steps_balanced for trace in traces]))


def run_seed(
    seed: int,
    *,
    episodes: int,
    k: int,
    epochs: int,
    dynamics_epochs: int,
    workers: int,
) -> SeedOutcome:
    world = WorldConfig()
    dataset: Dataset = clean_dataset(
        generate_dataset(world, BehaviorSpec(), episodes, seed), world
    )
    logger.info("Seed %d: %d cleaned records", seed, len(dataset))
    fit = train_ensemble(
        dataset, k, DynamicsTrainConfig(epochs=dynamics_epochs), seed, workers=workers
    )
    train = TrainConfig(epochs=epochs, seed=seed, world=world)
    starts = _centered_starts(3, seed)

    trained = train_policy(fit.ensemble, dataset, train, PolicyConfig())
    policy = QuantumPolicy(PolicyConfig(), trained.params)
    frozen_config = PolicyConfig().without_trainable_weights()
    frozen = train_policy(fit.ensemble, dataset, train, frozen_config)
    frozen_policy = QuantumPolicy(frozen_config, frozen.params)

    report = binned_evaluation(policy, world, BinsConfig(), seed, workers=workers)
    means = report.means
    middle = len(means) // 2
    delay_means = [
        _world_mean(policy, world, LatencyModel(fixed_delay_ms=delay, inference_ms=0.0), seed)
        for delay in DELAYS_MS
    ]
    return SeedOutcome(
        seed=seed,
        surrogate_tw=_surrogate_steps(policy, fit.ensemble, starts),
        surrogate_frozen=_surrogate_steps(frozen_policy, fit.ensemble, starts),
        centre_means=means[middle - 1 : middle + 1],
        edge_means=[means[0], means[-1]],
        delay_means=delay_means,
        weights_tw=_final_weights(trained.report),
        weights_frozen=_final_weights(frozen.report),
    )


def _majority(flags: Sequence[bool]) -> bool:
    return sum(flags) * 2 > len(flags)


def _balanced(steps: Sequence[int]) -> bool:
    return _majority([value >= BALANCE_STEPS for value in steps])


def _final_weights(report: TrainReport) -> WeightStats | None:
    return report.rows[-1].weights if report.rows else None


def _describe_weights(stats: WeightStats | None) -> str:
    if stats is None:
        return "n/a"
    return f"in {stats.input:.3f} var {stats.variational:.3f} out {stats.output:.3f}"


def pipeline_checks(outcomes: Sequence[SeedOutcome]) -> list[CheckResult]:
    tw = [_balanced(o.surrogate_tw) for o in outcomes]
    frozen = [_balanced(o.surrogate_frozen) for o in outcomes]
    centre = [min(o.centre_means) >= BALANCE_STEPS for o in outcomes]
    edges = [max(o.edge_means) <= min(o.centre_means) for o in outcomes]
    instant = [o.delay_means[0] >= BALANCE_STEPS for o in outcomes]
    cloud = [o.delay_means[-1] < BALANCE_STEPS for o in outcomes]
    monotone = [
        all(b <= a for a, b in zip(o.delay_means[:-1], o.delay_means[1:], strict=True))
        for o in outcomes
    ]
    needed = max(1, math.ceil(2 * len(outcomes) / 3))
    return [
        CheckResult("surrogate balance", sum(tw) >= needed, f"{sum(tw)}/{len(tw)} seeds"),
        CheckResult(
            "trainable-weights ablation",
            sum(tw) >= needed and len(frozen) - sum(frozen) >= needed,
            f"with weights {sum(tw)}/{len(tw)}, without {sum(frozen)}/{len(frozen)}",
        ),
        CheckResult("binned centre", _majority(centre), f"{sum(centre)}/{len(centre)} seeds"),
        CheckResult(
            "edge degradation (advisory)", True, f"{sum(edges)}/{len(edges)} seeds edges<=centre"
        ),
        CheckResult(
            "weight magnitudes (advisory)",
            True,
            "; ".join(
                f"seed {o.seed}: with [{_describe_weights(o.weights_tw)}] "
                f"without [{_describe_weights(o.weights_frozen)}]"
                for o in outcomes
            ),
        ),
        CheckResult(
            "zero-delay balance", _majority(instant), f"{sum(instant)}/{len(instant)} seeds"
        ),
        CheckResult("cloud latency fails", all(cloud), f"{sum(cloud)}/{len(cloud)} seeds"),
        CheckResult(
            "monotone delay degradation",
            sum(monotone) >= math.ceil(0.8 * len(monotone)),
            f"{sum(monotone)}/{len(monotone)} seeds",
        ),
    ]


def check_return_identities(seed: int) -> CheckResult:
    world = WorldConfig()
    dataset = generate_dataset(world, BehaviorSpec(max_episode_steps=100), 20, seed)
    fit = train_ensemble(
        dataset, 1, DynamicsTrainConfig(hidden_size=16, epochs=2, min_transitions=50), seed
    )
    config = PolicyConfig()
    policy = QuantumPolicy(config, init_policy(config, seed))
    start = _centered_starts(1, seed)[0]
    zero = rollout(policy, fit.ensemble.models[0], start, TrainConfig(gamma=0.0, horizon=10))

    def constant(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return -np.ones(len(features)), np.zeros_like(features)

    geometric = rollout(
        policy,
        fit.ensemble.models[0],
        start,
        TrainConfig(gamma=0.99, horizon=200),
        reward_fn=constant,
    )
    closed_form = -(1 - 0.99**200) / 0.01
    passed = zero.discounted_return == zero.rewards[0] and (
        abs(geometric.discounted_return - closed_form) < 1e-9
    )
    return CheckResult(
        "rollout return identities", passed, f"geometric {geometric.discounted_return:.4f}"
    )


def _print_table(results: Sequence[CheckResult]) -> None:
    width = max(len(result.name) for result in results)
    typer.echo("\nAcceptance summary")
    typer.echo("==================")
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        typer.echo(f"{result.name.ljust(width)}  {status}  {result.detail}")


def _run_check(name: str, check: Callable[[], CheckResult]) -> CheckResult:
    typer.echo(f"Running {name} ...")
    return check()


@app.command()
def run(
    seeds: int = typer.Option(3, min=1, help="Pipeline seeds"),
    episodes: int = typer.Option(150, min=1, help="Behaviour episodes per seed"),
    k: int = typer.Option(20, min=1, help="Ensemble size"),
    epochs: int = typer.Option(2000, min=0, help="Policy gradient steps"),
    dynamics_epochs: int = typer.Option(30, min=1, help="Passes per transition model"),
    workers: int = typer.Option(1, min=1, help="Worker threads"),
    quick: bool = typer.Option(False, help="Only the fast checks, no pipelines"),
) -> None:
    """Run every check and exit non-zero when any of them fails."""

    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(message)s")
    results = [
        _run_check("gradients", lambda: check_gradients(100, 0)),
        _run_check("statevector", lambda: check_statevector(1000, 0)),
        _run_check("latency", lambda: check_latency(1000, 0)),
        _run_check("identities", lambda: check_return_identities(0)),
        _run_check("reproducibility", lambda: check_reproducibility(0)),
    ]
    if not quick:
        outcomes = []
        for seed in range(seeds):
            typer.echo(f"Running pipeline for seed {seed} ...")
            outcomes.append(
                run_seed(
                    seed,
                    episodes=episodes,
                    k=k,
                    epochs=epochs,
                    dynamics_epochs=dynamics_epochs,
                    workers=workers,
                )
            )
            outcome = outcomes[-1]
            typer.echo(
                f"Seed {seed} weight magnitudes: with [{_describe_weights(outcome.weights_tw)}] "
                f"without [{_describe_weights(outcome.weights_frozen)}]"
            )
        results.extend(pipeline_checks(outcomes))
    _print_table(results)
    if not all(result.passed for result in results):
        raise typer.Exit(code=1)


if __name__ == "__main__":  # pragma: no cover
    app()
