"""Adam updates of policy parameters."""

from __future__ import annotations

from qmoose.domain import FloatArray
from qmoose.exceptions import ConfigurationError
from qmoose.optim import AdamState, adam_update
from qmoose.policy import PolicyParams

from .models import TrainConfig


def init_adam(params: PolicyParams) -> AdamState:
    return AdamState.zeros(params.n_params)


def adam_step(
    params: PolicyParams, grad: FloatArray, state: AdamState, config: TrainConfig
) -> tuple[PolicyParams, AdamState]:
    """Bias-corrected Adam step on the flat layout; frozen groups keep their values."""

    if grad.shape != (params.n_params,):
        msg = f"Gradient shape {grad.shape} does not match {params.n_params} parameters"
        raise ConfigurationError(msg)
    values, state = adam_update(
        params.to_vector(),
        grad,
        state,
        learning_rate=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
        mask=params.trainable_mask(),
    )
    return params.with_vector(values), state


__all__ = ["adam_step", "init_adam"]
