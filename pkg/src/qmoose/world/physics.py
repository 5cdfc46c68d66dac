"""Frictionless cart-pole dynamics and the balancing reward."""

from __future__ import annotations

import math

import numpy as np

from qmoose.domain import COS_THETA, P, SIN_THETA, THETA_DOT, FloatArray, TerminationCause
from qmoose.exceptions import NumericError

from .models import PhysicalState, RewardConfig, WorldConfig, wrap_angle

_DEFAULT_WORLD = WorldConfig()


def accelerations(
    theta: float, theta_dot: float, force: float, config: WorldConfig
) -> tuple[float, float]:
    """Cart and pole accelerations of the classic cart-pole equations of motion."""

    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    temp = (force + config.polemass_length * theta_dot**2 * sin_t) / config.total_mass
    theta_acc = (config.gravity * sin_t - cos_t * temp) / (
        config.pole_half_length * (4.0 / 3.0 - config.pole_mass * cos_t**2 / config.total_mass)
    )
    p_acc = temp - config.polemass_length * theta_acc * cos_t / config.total_mass
    return p_acc, theta_acc


def physics_step(state: PhysicalState, action: float, config: WorldConfig) -> PhysicalState:
    """Advance one control period with semi-implicit Euler.

    The action is clamped to ``[-1, 1]`` and scaled by ``force_scale``; velocities update
    first and positions use the new velocities.
    """

    if not math.isfinite(action):
        msg = f"Action must be finite, got {action}"
        raise NumericError(msg)
    force = config.force_scale * min(1.0, max(-1.0, action))
    p_acc, theta_acc = accelerations(state.theta, state.theta_dot, force, config)
    p_dot = state.p_dot + config.dt * p_acc
    theta_dot = state.theta_dot + config.dt * theta_acc
    p = state.p + config.dt * p_dot
    theta = state.theta + config.dt * theta_dot
    values = (p, p_dot, theta, theta_dot)
    if not all(math.isfinite(value) for value in values):
        msg = f"Integration produced non-finite state {values}"
        raise NumericError(msg)
    return PhysicalState(p=p, p_dot=p_dot, theta=wrap_angle(theta), theta_dot=theta_dot)


def reward(
    p: float, theta: float, theta_dot: float, config: WorldConfig = _DEFAULT_WORLD
) -> float:
    """Non-positive balancing reward.

    ``-[(p/track_limit)^2 + (theta/pi)^2 + c * (theta_dot/omega_ref)^2 * [|theta| <= gate]]``
    """

    rc: RewardConfig = config.reward
    penalty = (p / config.track_limit) ** 2 + (theta / math.pi) ** 2
    if abs(theta) <= rc.gate_radians:
        penalty += rc.omega_weight * (theta_dot / rc.omega_ref) ** 2
    return -penalty


def feature_reward(features: FloatArray, config: WorldConfig) -> tuple[FloatArray, FloatArray]:
    """Reward of feature-space states of shape ``(batch, 8)`` and its gradient.

    The angle is recovered with ``atan2(sin, cos)``; the angular-velocity gate is treated as
    locally constant.
    """

    rc = config.reward
    p = features[:, P]
    cos_t = features[:, COS_THETA]
    sin_t = features[:, SIN_THETA]
    theta_dot = features[:, THETA_DOT]
    theta = np.arctan2(sin_t, cos_t)
    gate = (np.abs(theta) <= rc.gate_radians).astype(np.float64)
    values = -(
        (p / config.track_limit) ** 2
        + (theta / math.pi) ** 2
        + gate * rc.omega_weight * (theta_dot / rc.omega_ref) ** 2
    )
    radius_sq = np.maximum(cos_t**2 + sin_t**2, 1e-12)
    d_theta = -2.0 * theta / math.pi**2
    grads = np.zeros_like(features)
    grads[:, P] = -2.0 * p / config.track_limit**2
    grads[:, COS_THETA] = d_theta * (-sin_t / radius_sq)
    grads[:, SIN_THETA] = d_theta * (cos_t / radius_sq)
    grads[:, THETA_DOT] = -2.0 * gate * rc.omega_weight * theta_dot / rc.omega_ref**2
    return values, grads


def mechanical_energy(state: PhysicalState, config: WorldConfig) -> float:
    """Kinetic plus potential energy, potential measured from the hanging position."""

    l = config.pole_half_length  # noqa: E741
    m = config.pole_mass
    cart = 0.5 * config.cart_mass * state.p_dot**2
    pole_cm = 0.5 * m * (
        state.p_dot**2
        + 2.0 * state.p_dot * l * state.theta_dot * math.cos(state.theta)
        + l**2 * state.theta_dot**2
    )
    pole_spin = 0.5 * (m * l**2 / 3.0) * state.theta_dot**2
    potential = m * config.gravity * l * (1.0 + math.cos(state.theta))
    return cart + pole_cm + pole_spin + potential


def termination(p: float, theta: float, config: WorldConfig) -> TerminationCause | None:
    if abs(theta) > config.fail_angle:
        return TerminationCause.POLE_FELL
    if abs(p) > config.track_limit:
        return TerminationCause.TRACK_EXCEEDED
    return None


__all__ = [
    "accelerations",
    "feature_reward",
    "mechanical_energy",
    "physics_step",
    "reward",
    "termination",
]
