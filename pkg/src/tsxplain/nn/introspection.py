"""Model introspection: hidden activations, input optimization, uncertainty."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParamsError, NonFiniteError
from ..validation import check_class_index, check_series
from .model import Model, softmax

# rng stream tag for stochastic forward passes; keeps draws independent of
# other seeded consumers that share a base seed
_MC_STREAM = 11


def activation_vector(model: Model, x) -> np.ndarray:
    """Input of the final Dense layer for one series, float32."""
    return model.forward(x).penultimate


def activation_maximization(
    model: Model,
    target_class: int,
    steps: int = 256,
    lr: float = 0.1,
    l2: float = 1e-3,
    init=None,
) -> np.ndarray:
    """Gradient-ascent input that drives one logit up.

    Maximizes ``logit_c(x) - l2 * ||x||^2`` from ``init`` (zeros when not
    given). Deterministic: no stochastic layers are active.
    """
    target_class = check_class_index(target_class, model.class_count)
    if steps < 1 or lr <= 0 or l2 < 0:
        raise InvalidParamsError("need steps >= 1, lr > 0, l2 >= 0")
    if init is None:
        x = np.zeros(model.input_length, dtype=np.float64)
    else:
        x = check_series(init, model.input_length, "init").astype(np.float64)

    dlogits = np.zeros((1, model.class_count))
    dlogits[0, target_class] = 1.0
    for _ in range(steps):
        grad = model.input_gradients(x[None, :], dlogits)[0]
        x = x + lr * (grad - 2.0 * l2 * x)
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("activation maximization diverged")
    return x.astype(np.float32)


def mc_dropout_predict(model: Model, x, passes: int = 25, seed: int = 0):
    """Mean and std of class probabilities over stochastic dropout passes.

    Returns (mean, std), both (class_count,) float64; std is the population
    standard deviation, exactly zero when the model has no dropout layers.
    """
    if passes < 1:
        raise InvalidParamsError("passes must be >= 1")
    x = check_series(x, model.input_length, "input").astype(np.float64)
    seq = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    rng = np.random.default_rng([_MC_STREAM, *seq])
    probs = np.empty((passes, model.class_count))
    batch = x[None, :]
    for i in range(passes):
        probs[i] = softmax(model.logits(batch, dropout_active=True, rng=rng))[0]
    return probs.mean(axis=0), probs.std(axis=0)
