"""Finite-difference verification of every analytic gradient."""

from __future__ import annotations

import numpy as np

from .fnn import fnn_loss_and_grads, init_fnn_params
from .recurrent import (
    init_lstm_params,
    init_rnn_params,
    lstm_loss_and_grads,
    rnn_loss_and_grads,
)

FD_STEP = 1e-5
REL_FLOOR = 1e-3  # denominators below this are treated as this


def gradient_check(
    kind: str,
    hidden_sizes: list[int],
    inputs: np.ndarray,
    targets: np.ndarray,
    rng_seed: int = 0,
) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Parameters are drawn at random from the seed; biases get an extra
    perturbation so the check never sits at a symmetric point. Inputs are
    (batch, features) for fnn and (batch, steps, features) for rnn/lstm.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    rng = np.random.default_rng(rng_seed)
    n_features = inputs.shape[-1]
    if kind == "fnn":
        params = init_fnn_params(n_features, hidden_sizes, rng)
        loss_and_grads = fnn_loss_and_grads
    elif kind == "rnn":
        params = init_rnn_params(n_features, hidden_sizes, rng)
        loss_and_grads = rnn_loss_and_grads
    elif kind == "lstm":
        params = init_lstm_params(n_features, hidden_sizes, rng)
        loss_and_grads = lstm_loss_and_grads
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    for p in params:
        if p.ndim <= 1:
            p += rng.uniform(-0.5, 0.5, p.shape)

    _, grads = loss_and_grads(params, inputs, targets)
    worst = 0.0
    for p, g in zip(params, grads):
        flat_p = p.reshape(-1)
        flat_g = np.asarray(g).reshape(-1)
        for j in range(flat_p.size):
            saved = flat_p[j]
            flat_p[j] = saved + FD_STEP
            up, _ = loss_and_grads(params, inputs, targets)
            flat_p[j] = saved - FD_STEP
            down, _ = loss_and_grads(params, inputs, targets)
            flat_p[j] = saved
            fd = (up - down) / (2.0 * FD_STEP)
            denom = max(abs(flat_g[j]), abs(fd), REL_FLOOR)
            worst = max(worst, abs(flat_g[j] - fd) / denom)
    return worst
