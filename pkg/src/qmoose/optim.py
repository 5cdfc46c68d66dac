"""Adam on flat parameter vectors, shared by dynamics fitting and policy training."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qmoose.domain import FloatArray
from qmoose.exceptions import ConfigurationError


@dataclass(frozen=True, slots=True)
class AdamState:
    """First and second moment estimates plus the step counter."""

    m: FloatArray
    v: FloatArray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> AdamState:
        return cls(m=np.zeros(size, dtype=np.float64), v=np.zeros(size, dtype=np.float64))


def adam_update(
    values: FloatArray,
    grad: FloatArray,
    state: AdamState,
    *,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    mask: FloatArray | None = None,
) -> tuple[FloatArray, AdamState]:
    """One bias-corrected Adam step; entries where ``mask`` is 0 are left untouched."""

    if values.shape != grad.shape or state.m.shape != values.shape:
        msg = (
            f"Adam shapes disagree: values {values.shape}, grad {grad.shape}, "
            f"moments {state.m.shape}"
        )
        raise ConfigurationError(msg)
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    step = learning_rate * m_hat / (np.sqrt(v_hat) + eps)
    if mask is not None:
        step = step * mask
        m = np.where(mask > 0, m, state.m)
        v = np.where(mask > 0, v, state.v)
    return values - step, AdamState(m=m, v=v, t=t)


def clip_by_global_norm(grad: FloatArray, max_norm: float) -> tuple[FloatArray, float]:
    norm = float(np.linalg.norm(grad))
    if max_norm > 0 and norm > max_norm:
        return grad * (max_norm / norm), norm
    return grad, norm


__all__ = ["AdamState", "adam_update", "clip_by_global_norm"]
