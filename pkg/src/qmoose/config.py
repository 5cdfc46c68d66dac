"""Lightweight application configuration loader."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def _default_workers() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class AppSettings:
    """Immutable configuration sourced from environment variables."""

    environment: str = "development"
    artifacts_root: Path = Path("artifacts")
    log_level: str = "INFO"
    workers: int = field(default_factory=_default_workers)
    default_seed: int = 0

    @classmethod
    def from_env(cls, *, dotenv_path: Path | None = None) -> AppSettings:
        """Resolve settings, reading a `.env` file first when one is present."""

        load_dotenv(dotenv_path)
        return cls(
            environment=os.getenv("QMOOSE_ENV", cls.environment),
            artifacts_root=Path(os.getenv("QMOOSE_ARTIFACTS_ROOT", str(cls.artifacts_root))),
            log_level=os.getenv("QMOOSE_LOG_LEVEL", cls.log_level).upper(),
            workers=max(1, _env_int("QMOOSE_WORKERS", _default_workers())),
            default_seed=_env_int("QMOOSE_SEED", cls.default_seed),
        )


__all__ = ["AppSettings"]
