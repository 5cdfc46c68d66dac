"""Declarative run configuration for the command-line pipelines."""

from __future__ import annotations

from pathlib import Path

from pydantic import ValidationError

from qmoose.domain import DomainModel
from qmoose.dynamics import DynamicsTrainConfig
from qmoose.exceptions import ConfigurationError
from qmoose.harness import BinsConfig, LatencyModel
from qmoose.policy import PolicyConfig
from qmoose.training import TrainConfig
from qmoose.world import BehaviorSpec, WorldConfig


class RunPaths(DomainModel):
    """Artifact locations; relative paths resolve against the artifacts root."""

    dataset: Path = Path("data/dataset.csv")
    ensemble: Path = Path("models/ensemble")
    policy_dir: Path = Path("models/policy")
    reports: Path = Path("reports")

    def resolve(self, root: Path) -> RunPaths:
        return RunPaths(
            dataset=_under(root, self.dataset),
            ensemble=_under(root, self.ensemble),
            policy_dir=_under(root, self.policy_dir),
            reports=_under(root, self.reports),
        )


def _under(root: Path, path: Path) -> Path:
    return path if path.is_absolute() else root / path


class RunConfig(DomainModel):
    """Everything one pipeline run depends on, including its global seed."""

    seed: int = 0
    world: WorldConfig = WorldConfig()
    behavior: BehaviorSpec = BehaviorSpec()
    policy: PolicyConfig = PolicyConfig()
    dynamics: DynamicsTrainConfig = DynamicsTrainConfig()
    train: TrainConfig = TrainConfig()
    latency: LatencyModel = LatencyModel(inference_ms=0.0)
    bins: BinsConfig = BinsConfig()
    paths: RunPaths = RunPaths()

    @classmethod
    def from_file(cls, path: Path) -> RunConfig:
        if not path.is_file():
            msg = f"Run configuration {path} does not exist"
            raise ConfigurationError(msg)
        try:
            return cls.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            msg = f"Invalid run configuration {path}: {exc}"
            raise ConfigurationError(msg) from exc

    def training(self) -> TrainConfig:
        """Training settings bound to this run's world and seed."""

        return self.train.model_copy(update={"world": self.world, "seed": self.seed})


def load_run_config(path: Path | None, *, seed: int | None = None) -> RunConfig:
    """Read ``path`` (or defaults) and apply a command-line seed override."""

    config = RunConfig.from_file(path) if path is not None else RunConfig()
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    return config


__all__ = ["RunConfig", "RunPaths", "load_run_config"]
