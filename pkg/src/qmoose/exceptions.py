"""Exception hierarchy shared across qmoose subsystems."""

from __future__ import annotations


class QmooseError(RuntimeError):
    """Base class for qmoose failures."""


class ConfigurationError(QmooseError):
    """Raised when indices, shapes, bounds or settings are invalid."""


class UnsupportedGateError(ConfigurationError):
    """Raised when a gradient rule is requested for a gate it does not apply to."""


class NumericError(QmooseError):
    """Raised when a computation receives or produces non-finite values."""


class DataError(QmooseError):
    """Raised when a dataset is missing, empty or too small for the request."""


__all__ = [
    "ConfigurationError",
    "DataError",
    "NumericError",
    "QmooseError",
    "UnsupportedGateError",
]
