"""Domain layer public exports."""

from .base import DomainModel
from .enums import Axis, EvalMode, GateKind, ModelExpectation, ParamGroup, TerminationCause
from .features import (
    A_PREV1,
    A_PREV2,
    A_PREV3,
    COS_THETA,
    FEATURE_DIM,
    FEATURE_NAMES,
    PHYSICAL_DIM,
    P,
    P_DOT,
    SIN_THETA,
    THETA_DOT,
    FeatureVector,
)
from .types import BoolArray, ComplexArray, FloatArray, IntArray

__all__ = [
    "A_PREV1",
    "A_PREV2",
    "A_PREV3",
    "COS_THETA",
    "FEATURE_DIM",
    "FEATURE_NAMES",
    "PHYSICAL_DIM",
    "P",
    "P_DOT",
    "SIN_THETA",
    "THETA_DOT",
    "Axis",
    "BoolArray",
    "ComplexArray",
    "DomainModel",
    "EvalMode",
    "FeatureVector",
    "FloatArray",
    "GateKind",
    "IntArray",
    "ModelExpectation",
    "ParamGroup",
    "TerminationCause",
]
