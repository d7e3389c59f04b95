"""Feedforward network with ReLU hidden layers and analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import Scaler, StateConfig, SupervisedSet, identity_scaler
from .adam import Adam
from .common import TrainConfig, check_finite_loss, glorot_uniform, minibatch_indices


@dataclass
class FnnModel:
    """Hidden layers (weights, biases) plus a fully connected scalar output."""

    kind = "fnn"

    hidden_weights: list[np.ndarray]  # each (units, fan_in)
    hidden_biases: list[np.ndarray]  # each (units,)
    out_weight: np.ndarray  # (units_last,)
    out_bias: float
    feature_layout: tuple[str, ...]
    scaler: Scaler
    state_config: StateConfig

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Standardized predictions for a (samples, features) matrix."""
        h = inputs
        for w, b in zip(self.hidden_weights, self.hidden_biases):
            h = np.maximum(h @ w.T + b, 0.0)
        return h @ self.out_weight + self.out_bias

    def hidden_sizes(self) -> list[int]:
        return [w.shape[0] for w in self.hidden_weights]


def fnn_forward(model: FnnModel, features: np.ndarray) -> float:
    """Consumption prediction in MWh for one raw (unstandardized) feature row."""
    features = np.asarray(features, dtype=float)
    if features.shape != (len(model.feature_layout),):
        raise ValueError(
            f"expected {len(model.feature_layout)} features, got shape {features.shape}"
        )
    x = model.scaler.transform_inputs(features[None, :])
    y = model.forward(x)
    return float(model.scaler.inverse_targets(y)[0])


def init_fnn_params(
    n_features: int, hidden_sizes: list[int], rng: np.random.Generator
) -> list[np.ndarray]:
    """Parameter list [W1, b1, ..., WL, bL, w_out, b_out]."""
    params: list[np.ndarray] = []
    fan_in = n_features
    for units in hidden_sizes:
        params.append(glorot_uniform(rng, units, fan_in))
        params.append(np.zeros(units))
        fan_in = units
    params.append(glorot_uniform(rng, 1, fan_in)[0])
    params.append(np.zeros(()))
    return params


def fnn_loss_and_grads(
    params: list[np.ndarray], inputs: np.ndarray, targets: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Minibatch MSE and its gradient with respect to every parameter.

    The ReLU subgradient at exactly zero is taken as zero, matching the
    forward pass mask convention.
    """
    n_layers = (len(params) - 2) // 2
    weights = [params[2 * l] for l in range(n_layers)]
    biases = [params[2 * l + 1] for l in range(n_layers)]
    w_out, b_out = params[-2], params[-1]

    activations = [inputs]
    pre_acts = []
    h = inputs
    for w, b in zip(weights, biases):
        z = h @ w.T + b
        pre_acts.append(z)
        h = np.maximum(z, 0.0)
        activations.append(h)
    y = h @ w_out + b_out

    m = len(targets)
    residual = y - targets
    loss = float(np.mean(residual**2))

    dy = 2.0 * residual / m
    g_w_out = activations[-1].T @ dy
    g_b_out = np.asarray(dy.sum())
    dh = np.outer(dy, w_out)

    grads: list[np.ndarray | None] = [None] * len(params)
    grads[-2], grads[-1] = g_w_out, g_b_out
    for l in range(n_layers - 1, -1, -1):
        dz = dh * (pre_acts[l] > 0.0)
        grads[2 * l] = dz.T @ activations[l]
        grads[2 * l + 1] = dz.sum(axis=0)
        if l > 0:
            dh = dz @ weights[l]
    return loss, grads  # type: ignore[return-value]


def train_fnn(
    dataset: SupervisedSet,
    hidden_sizes: list[int],
    cfg: TrainConfig,
    scaler: Scaler | None = None,
    state_config: StateConfig | None = None,
) -> tuple[FnnModel, np.ndarray]:
    """Adam training on seeded minibatches; returns the model and loss curve."""
    inputs = np.asarray(dataset.inputs, dtype=float)
    targets = np.asarray(dataset.targets, dtype=float)
    if len(targets) < 1:
        raise ValueError("cannot train on an empty dataset")
    n_features = inputs.shape[1]

    rng = np.random.default_rng(cfg.rng_seed)
    params = init_fnn_params(n_features, hidden_sizes, rng)
    optimizer = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)

    losses = np.empty(cfg.steps)
    for step, idx in enumerate(
        minibatch_indices(rng, len(targets), cfg.batch_size, cfg.steps)
    ):
        loss, grads = fnn_loss_and_grads(params, inputs[idx], targets[idx])
        check_finite_loss(loss, step)
        losses[step] = loss
        optimizer.step(params, grads)

    n_layers = len(hidden_sizes)
    if scaler is None:
        scaler = identity_scaler(n_features)
    if state_config is None:
        state_config = StateConfig(order=0, time_encoding="none")
    model = FnnModel(
        hidden_weights=[params[2 * l] for l in range(n_layers)],
        hidden_biases=[params[2 * l + 1] for l in range(n_layers)],
        out_weight=params[-2],
        out_bias=float(params[-1]),
        feature_layout=dataset.feature_layout,
        scaler=scaler,
        state_config=state_config,
    )
    return model, losses
