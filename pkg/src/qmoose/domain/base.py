"""Pydantic base for configuration objects and persisted documents."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict


class DomainModel(BaseModel):
    """Immutable model with strict validation; NaN and infinite floats are rejected."""

    model_config = ConfigDict(
        frozen=True, extra="forbid", validate_assignment=True, allow_inf_nan=False
    )
