"""Cross-entropy training with Adam.

Adam moments are kept in float64 and parameters in float32; the update is
computed in float64 and cast back, so a zero learning rate leaves every
parameter bitwise unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import TRAIN, TimeSeriesDataset
from ..errors import InvalidParamsError, NonFiniteLossError, ShapeMismatchError
from .model import Model, _backward, softmax


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidParamsError("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidParamsError("batch_size must be >= 1")
        # learning_rate 0 is allowed so no-op training stays testable
        if self.learning_rate < 0:
            raise InvalidParamsError("learning_rate must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.epsilon > 0):
            raise InvalidParamsError("bad adam parameters")


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)


class _Adam:
    def __init__(self, params, config: TrainConfig):
        self.config = config
        self.t = 0
        self.m = [
            None if p is None else {k: np.zeros(v.shape, dtype=np.float64) for k, v in p.items()}
            for p in params
        ]
        self.v = [
            None if p is None else {k: np.zeros(v.shape, dtype=np.float64) for k, v in p.items()}
            for p in params
        ]

    def step(self, params, grads):
        cfg = self.config
        self.t += 1
        bc1 = 1.0 - cfg.beta1**self.t
        bc2 = 1.0 - cfg.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if p is None or g is None:
                continue
            for key in p:
                gk = np.asarray(g[key], dtype=np.float64)
                m[key] = cfg.beta1 * m[key] + (1.0 - cfg.beta1) * gk
                v[key] = cfg.beta2 * v[key] + (1.0 - cfg.beta2) * gk * gk
                update = cfg.learning_rate * (m[key] / bc1) / (np.sqrt(v[key] / bc2) + cfg.epsilon)
                p[key] = (p[key].astype(np.float64) - update).astype(np.float32)


def train_arrays(model: Model, X, y, config: TrainConfig) -> TrainHistory:
    """Train in place on (X, y); returns the per-epoch loss/accuracy history."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != model.input_length:
        raise ShapeMismatchError(f"train batch shape {X.shape} != (N, {model.input_length})")
    if X.shape[0] == 0:
        raise InvalidParamsError("nothing to train on")
    if y.shape != (X.shape[0],):
        raise ShapeMismatchError("labels must align with the sample block")
    if y.min() < 0 or y.max() >= model.class_count:
        raise InvalidParamsError("labels outside model class range")

    rng = np.random.default_rng(config.seed)
    optimizer = _Adam(model.params, config)
    history = TrainHistory()
    n = X.shape[0]

    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            xb, yb = X[batch], y[batch]
            logits, _, caches = model._run(xb, True, rng, need_cache=True)
            probs = softmax(logits)
            batch_loss = -np.mean(np.log(np.maximum(probs[np.arange(len(batch)), yb], 1e-300)))
            if not np.isfinite(batch_loss):
                raise NonFiniteLossError(f"loss diverged at step {optimizer.t}")
            epoch_loss += batch_loss * len(batch)
            correct += int((np.argmax(logits, axis=1) == yb).sum())

            dlogits = probs.copy()
            dlogits[np.arange(len(batch)), yb] -= 1.0
            dlogits /= len(batch)
            _, grads = _backward(model.layers, caches, dlogits, collect_param_grads=True)
            optimizer.step(model.params, grads)

        history.loss.append(float(epoch_loss / n))
        history.accuracy.append(float(correct / n))
    return history


def train(model: Model, dataset: TimeSeriesDataset, config: TrainConfig) -> TrainHistory:
    """Train on the dataset's train split."""
    idx = dataset.indices(TRAIN)
    if idx.size == 0:
        raise InvalidParamsError("dataset has no train split")
    return train_arrays(model, dataset.samples[idx], dataset.labels[idx], config)
