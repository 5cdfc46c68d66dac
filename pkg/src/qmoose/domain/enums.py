"""Enumerations used across the qmoose domain layer."""

from __future__ import annotations

from enum import StrEnum


class GateKind(StrEnum):
    """Gate set supported by the statevector simulator."""

    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"

    @property
    def is_rotation(self) -> bool:
        return self is not GateKind.CNOT


class Axis(StrEnum):
    """Pauli axis of a single-qubit rotation."""

    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def gate(self) -> GateKind:
        return GateKind(f"R{self.value}")


class ParamGroup(StrEnum):
    """Trainable parameter groups of the quantum policy."""

    INPUT = "input"
    VARIATIONAL = "variational"
    OUTPUT = "output"


class TerminationCause(StrEnum):
    """Why a closed-loop episode ended."""

    POLE_FELL = "pole_fell"
    TRACK_EXCEEDED = "track_exceeded"
    MAX_STEPS = "max_steps"


class ModelExpectation(StrEnum):
    """Estimator used for the expectation over ensemble members."""

    SAMPLED = "sampled"
    FULL = "full"


class EvalMode(StrEnum):
    """Plant used by the evaluation command."""

    SURROGATE = "surrogate"
    WORLD = "world"
