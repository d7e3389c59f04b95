"""Shared training plumbing for the gradient-trained model families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings shared by all trained families."""

    learning_rate: float = 0.001
    steps: int = 10000
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    rng_seed: int = 0
    gradient_clip_norm: float = 5.0  # applied to recurrent training only

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.batch_size < 1 or self.steps < 1:
            raise ValueError("learning_rate, steps, and batch_size must be positive")
        if self.gradient_clip_norm <= 0 or self.epsilon <= 0:
            raise ValueError("gradient_clip_norm and epsilon must be positive")


def glorot_uniform(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    """Symmetric uniform init with limit sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, (fan_out, fan_in))


def check_finite_loss(loss: float, step: int) -> None:
    if not np.isfinite(loss):
        raise NumericalError(f"non-finite loss {loss} at training step {step}")


def minibatch_indices(
    rng: np.random.Generator, n_samples: int, batch_size: int, steps: int
):
    """Yield `steps` index batches, reshuffling the sample order each epoch.

    Batches are consecutive slices of a fresh permutation; a trailing
    partial slice is dropped when n_samples >= batch_size.
    """
    batch_size = min(batch_size, n_samples)
    per_epoch = n_samples // batch_size
    emitted = 0
    while emitted < steps:
        perm = rng.permutation(n_samples)
        for b in range(per_epoch):
            if emitted == steps:
                return
            yield perm[b * batch_size : (b + 1) * batch_size]
            emitted += 1
