"""qmoose - quantum-policy offline model-based reinforcement learning for cart-pole control."""

from __future__ import annotations

__all__ = ["__version__"]

__version__ = "0.1.0"
