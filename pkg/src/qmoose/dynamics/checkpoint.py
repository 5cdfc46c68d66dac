"""Ensemble checkpoints: one JSON document per model plus a manifest."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from qmoose.domain import DomainModel
from qmoose.exceptions import DataError

from .models import Activation, EnsembleFit, TransitionEnsemble, TransitionNet
from .net import ensemble_fingerprint

logger = logging.getLogger(__name__)

MODEL_FORMAT = "qmoose.transition-net/v1"
MANIFEST_FORMAT = "qmoose.ensemble/v1"
MANIFEST_NAME = "manifest.json"


class LayerDocument(DomainModel):
    weights: list[list[float]]
    bias: list[float]


class TransitionNetDocument(DomainModel):
    format: str = MODEL_FORMAT
    index: int
    seed: int
    activation: Activation
    layers: list[LayerDocument]
    in_mean: list[float]
    in_std: list[float]
    out_mean: list[float]
    out_std: list[float]
    train_mse: float | None = None

    @classmethod
    def capture(
        cls, index: int, seed: int, net: TransitionNet, train_mse: float | None
    ) -> TransitionNetDocument:
        return cls(
            index=index,
            seed=seed,
            activation=net.activation,
            layers=[
                LayerDocument(weights=w.tolist(), bias=b.tolist())
                for w, b in zip(net.weights, net.biases, strict=True)
            ],
            in_mean=net.in_mean.tolist(),
            in_std=net.in_std.tolist(),
            out_mean=net.out_mean.tolist(),
            out_std=net.out_std.tolist(),
            train_mse=train_mse,
        )

    def to_net(self) -> TransitionNet:
        return TransitionNet(
            weights=tuple(np.asarray(layer.weights, dtype=np.float64) for layer in self.layers),
            biases=tuple(np.asarray(layer.bias, dtype=np.float64) for layer in self.layers),
            in_mean=np.asarray(self.in_mean, dtype=np.float64),
            in_std=np.asarray(self.in_std, dtype=np.float64),
            out_mean=np.asarray(self.out_mean, dtype=np.float64),
            out_std=np.asarray(self.out_std, dtype=np.float64),
            activation=self.activation,
        )


class EnsembleManifest(DomainModel):
    """Index of an ensemble directory."""

    format: str = MANIFEST_FORMAT
    k: int
    seeds: list[int]
    model_files: list[str]
    in_mean: list[float]
    in_std: list[float]
    out_mean: list[float]
    out_std: list[float]
    train_mse: list[float]
    fingerprint: str


def model_filename(index: int) -> str:
    return f"model_{index:02d}.json"


def save_ensemble(directory: Path, fit: EnsembleFit) -> Path:
    """Write every member and the manifest; returns the manifest path."""

    directory.mkdir(parents=True, exist_ok=True)
    ensemble = fit.ensemble
    files: list[str] = []
    for index, (seed, net) in enumerate(zip(ensemble.seeds, ensemble.models, strict=True)):
        document = TransitionNetDocument.capture(index, seed, net, fit.train_mse[index])
        name = model_filename(index)
        (directory / name).write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
        files.append(name)
    first = ensemble.models[0]
    manifest = EnsembleManifest(
        k=ensemble.k,
        seeds=list(ensemble.seeds),
        model_files=files,
        in_mean=first.in_mean.tolist(),
        in_std=first.in_std.tolist(),
        out_mean=first.out_mean.tolist(),
        out_std=first.out_std.tolist(),
        train_mse=list(fit.train_mse),
        fingerprint=ensemble_fingerprint(ensemble),
    )
    path = directory / MANIFEST_NAME
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Saved %d-model ensemble to %s", ensemble.k, directory)
    return path


def load_ensemble(directory: Path) -> TransitionEnsemble:
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        msg = f"Ensemble manifest {manifest_path} does not exist"
        raise DataError(msg)
    manifest = EnsembleManifest.model_validate_json(manifest_path.read_text(encoding="utf-8"))
    models: list[TransitionNet] = []
    for name in manifest.model_files:
        path = directory / name
        if not path.is_file():
            msg = f"Ensemble member {path} listed in the manifest is missing"
            raise DataError(msg)
        document = TransitionNetDocument.model_validate_json(path.read_text(encoding="utf-8"))
        models.append(document.to_net())
    ensemble = TransitionEnsemble(models=tuple(models), seeds=tuple(manifest.seeds))
    if ensemble_fingerprint(ensemble) != manifest.fingerprint:
        msg = f"Ensemble in {directory} does not match its manifest fingerprint"
        raise DataError(msg)
    return ensemble


__all__ = [
    "MANIFEST_NAME",
    "EnsembleManifest",
    "TransitionNetDocument",
    "load_ensemble",
    "model_filename",
    "save_ensemble",
]
