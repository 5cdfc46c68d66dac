"""Forward and reverse-mode evaluation of transition models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from hashlib import sha256

import numpy as np

from qmoose.domain import (
    A_PREV1,
    A_PREV2,
    A_PREV3,
    COS_THETA,
    FEATURE_DIM,
    PHYSICAL_DIM,
    P,
    P_DOT,
    SIN_THETA,
    THETA_DOT,
    FeatureVector,
    FloatArray,
    IntArray,
)
from qmoose.exceptions import ConfigurationError, NumericError

from .models import NET_INPUT_DIM, Activation, TransitionEnsemble, TransitionNet

MIN_RADIUS = 1e-6

# Delta slot -> feature slot.
_PHYSICAL_SLOTS = (P, P_DOT, COS_THETA, SIN_THETA, THETA_DOT)


def _activate(z: FloatArray, activation: Activation) -> FloatArray:
    return np.tanh(z) if activation == "tanh" else z


def _activation_grad(h: FloatArray, activation: Activation) -> FloatArray:
    return 1.0 - h * h if activation == "tanh" else np.ones_like(h)


def net_inputs(features: FloatArray, actions: FloatArray) -> FloatArray:
    """Stack ``(batch, 8)`` features and ``(batch,)`` actions into ``(batch, 9)``."""

    return np.concatenate([features, actions[:, None]], axis=1)


def forward_batch(net: TransitionNet, inputs: FloatArray) -> tuple[FloatArray, list[FloatArray]]:
    """De-standardised deltas for ``(batch, 9)`` inputs, plus the hidden activations."""

    h = (inputs - net.in_mean) / net.in_std
    hidden = [h]
    for w, b in zip(net.weights[:-1], net.biases[:-1], strict=True):
        h = _activate(h @ w + b, net.activation)
        hidden.append(h)
    out = h @ net.weights[-1] + net.biases[-1]
    return out * net.out_std + net.out_mean, hidden


def backward_batch(
    net: TransitionNet, hidden: list[FloatArray], upstream: FloatArray
) -> FloatArray:
    """Gradient w.r.t. the ``(batch, 9)`` inputs given ``d loss / d delta``."""

    g = (upstream * net.out_std) @ net.weights[-1].T
    for layer in range(len(net.weights) - 2, -1, -1):
        g = (g * _activation_grad(hidden[layer + 1], net.activation)) @ net.weights[layer].T
    return g / net.in_std


def _single_input(s: FeatureVector, a: float) -> FloatArray:
    if not math.isfinite(a):
        msg = f"Action must be finite, got {a}"
        raise NumericError(msg)
    return net_inputs(s.to_array()[None, :], np.array([a]))


def net_forward(net: TransitionNet, s: FeatureVector, a: float) -> FloatArray:
    """Predicted delta of ``(p, p_dot, cos_theta, sin_theta, theta_dot)``."""

    delta, _ = forward_batch(net, _single_input(s, a))
    return delta[0]


def net_backward(
    net: TransitionNet, s: FeatureVector, a: float, upstream: FloatArray
) -> tuple[FloatArray, float]:
    """``(d/ds, d/da)`` of ``upstream . net_forward(s, a)``; weights are treated as constants."""

    if upstream.shape != (PHYSICAL_DIM,):
        msg = f"Upstream gradient must have {PHYSICAL_DIM} entries, got {upstream.shape}"
        raise ConfigurationError(msg)
    _, hidden = forward_batch(net, _single_input(s, a))
    grad = backward_batch(net, hidden, upstream[None, :])[0]
    return grad[:FEATURE_DIM], float(grad[FEATURE_DIM])


def step_features_batch(
    features: FloatArray, actions: FloatArray, delta: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Apply deltas, renormalise ``(cos, sin)`` and shift the action history.

    Returns the next features and the pre-normalisation ``(cos, sin)`` radius. The radius is
    floored at ``MIN_RADIUS`` for the division; callers decide how to treat degenerate rows.
    """

    nxt = features.copy()
    for slot, feature in enumerate(_PHYSICAL_SLOTS):
        nxt[:, feature] = features[:, feature] + delta[:, slot]
    radius = np.hypot(nxt[:, COS_THETA], nxt[:, SIN_THETA])
    safe = np.maximum(radius, MIN_RADIUS)
    nxt[:, COS_THETA] /= safe
    nxt[:, SIN_THETA] /= safe
    nxt[:, A_PREV3] = features[:, A_PREV2]
    nxt[:, A_PREV2] = features[:, A_PREV1]
    nxt[:, A_PREV1] = actions
    return nxt, radius


def step_features_backward(
    next_features: FloatArray, radius: FloatArray, upstream: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Pull ``d loss / d next_features`` back to ``(features, action, delta)``.

    The renormalisation ``u = v / |v|`` contributes ``(I - u u^T) / |v|``.
    """

    safe = np.maximum(radius, MIN_RADIUS)
    u_cos = next_features[:, COS_THETA]
    u_sin = next_features[:, SIN_THETA]
    g_cos = upstream[:, COS_THETA]
    g_sin = upstream[:, SIN_THETA]
    along = u_cos * g_cos + u_sin * g_sin
    v_cos = (g_cos - u_cos * along) / safe
    v_sin = (g_sin - u_sin * along) / safe

    d_delta = np.empty((len(upstream), PHYSICAL_DIM), dtype=np.float64)
    d_features = np.zeros_like(upstream)
    for slot, feature in enumerate(_PHYSICAL_SLOTS):
        d_delta[:, slot] = upstream[:, feature]
        d_features[:, feature] = upstream[:, feature]
    d_delta[:, 2] = v_cos
    d_delta[:, 3] = v_sin
    d_features[:, COS_THETA] = v_cos
    d_features[:, SIN_THETA] = v_sin
    d_features[:, A_PREV2] = upstream[:, A_PREV3]
    d_features[:, A_PREV1] = upstream[:, A_PREV2]
    return d_features, upstream[:, A_PREV1].copy(), d_delta


def step_features(s: FeatureVector, a: float, delta: FloatArray) -> FeatureVector:
    """Next feature vector after one predicted step."""

    if delta.shape != (PHYSICAL_DIM,):
        msg = f"Delta must have {PHYSICAL_DIM} entries, got {delta.shape}"
        raise ConfigurationError(msg)
    if not (math.isfinite(a) and np.all(np.isfinite(delta))):
        msg = "step_features received non-finite inputs"
        raise NumericError(msg)
    nxt, radius = step_features_batch(s.to_array()[None, :], np.array([a]), delta[None, :])
    if radius[0] < MIN_RADIUS:
        msg = f"Predicted (cos, sin) has degenerate norm {radius[0]:.3e}"
        raise NumericError(msg)
    return FeatureVector.from_array(nxt[0])


@dataclass(frozen=True, slots=True)
class MemberCache:
    """Per-member row groups and hidden activations of one ensemble forward pass."""

    groups: tuple[tuple[int, IntArray, list[FloatArray]], ...]


def ensemble_forward(
    ensemble: TransitionEnsemble, members: IntArray, inputs: FloatArray
) -> tuple[FloatArray, MemberCache]:
    """Evaluate row ``i`` of ``inputs`` with ``ensemble.models[members[i]]``."""

    delta = np.empty((len(inputs), PHYSICAL_DIM), dtype=np.float64)
    groups: list[tuple[int, IntArray, list[FloatArray]]] = []
    for member in np.unique(members):
        rows = np.flatnonzero(members == member)
        out, hidden = forward_batch(ensemble.models[int(member)], inputs[rows])
        delta[rows] = out
        groups.append((int(member), rows, hidden))
    return delta, MemberCache(tuple(groups))


def ensemble_backward(
    ensemble: TransitionEnsemble, cache: MemberCache, upstream: FloatArray
) -> FloatArray:
    grad = np.empty((len(upstream), NET_INPUT_DIM), dtype=np.float64)
    for member, rows, hidden in cache.groups:
        grad[rows] = backward_batch(ensemble.models[member], hidden, upstream[rows])
    return grad


def ensemble_predictions(ensemble: TransitionEnsemble, s: FeatureVector, a: float) -> FloatArray:
    """``(K, 5)`` deltas of every member for one input."""

    inputs = _single_input(s, a)
    return np.stack([forward_batch(net, inputs)[0][0] for net in ensemble.models])


def ensemble_disagreement(ensemble: TransitionEnsemble, s: FeatureVector, a: float) -> float:
    """Mean over output dimensions of the population std of member predictions."""

    if ensemble.k < 2:
        msg = f"Disagreement needs at least 2 models, ensemble has {ensemble.k}"
        raise ConfigurationError(msg)
    return float(np.mean(np.std(ensemble_predictions(ensemble, s, a), axis=0)))


def ensemble_fingerprint(ensemble: TransitionEnsemble) -> str:
    """SHA-256 over every member's parameters and seed."""

    digest = sha256()
    for seed, net in zip(ensemble.seeds, ensemble.models, strict=True):
        digest.update(f"{seed}:{net.activation}:{net.layer_sizes}".encode())
        for array in net.arrays():
            digest.update(np.ascontiguousarray(array, dtype=np.float64).tobytes())
    return digest.hexdigest()


__all__ = [
    "MemberCache",
    "backward_batch",
    "ensemble_backward",
    "ensemble_disagreement",
    "ensemble_fingerprint",
    "ensemble_forward",
    "ensemble_predictions",
    "forward_batch",
    "net_backward",
    "net_forward",
    "net_inputs",
    "step_features",
    "step_features_backward",
    "step_features_batch",
]
