"""Class-flipping counterfactuals: guided subsequence transplant and
optimization-based search.

Both generators re-verify the flip with a forward pass before returning, so a
returned record's predicted_class is always the model's actual output on its
series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidParamsError,
    NoFlipWithinBudgetError,
    NoUnlikeNeighborError,
)
from .nn.model import Model
from .validation import check_series


@dataclass
class Counterfactual:
    origin_index: int
    series: np.ndarray  # (T,) float32
    predicted_class: int
    method: str  # native | wachter
    changed_mask: np.ndarray  # (T,) bool
    l1: float
    l2: float
    degenerate: bool = False

    def to_doc(self) -> dict:
        return {
            "origin_index": int(self.origin_index),
            "series": np.asarray(self.series, dtype=np.float32).tolist(),
            "predicted_class": int(self.predicted_class),
            "method": self.method,
            "changed_mask": np.asarray(self.changed_mask, dtype=bool).tolist(),
            "l1": float(self.l1),
            "l2": float(self.l2),
            "degenerate": bool(self.degenerate),
        }


def _finish(origin_index, query, series, pred, method, mask, degenerate=False) -> Counterfactual:
    diff = series.astype(np.float64) - query.astype(np.float64)
    return Counterfactual(
        origin_index=int(origin_index),
        series=series.astype(np.float32),
        predicted_class=int(pred),
        method=method,
        changed_mask=mask,
        l1=float(np.abs(diff).sum()),
        l2=float(np.sqrt((diff**2).sum())),
        degenerate=degenerate,
    )


def nearest_unlike_neighbor(samples, preds, query, query_pred: int):
    """(index, series) of the closest sample the model predicts differently.

    Ties in distance resolve to the lowest index.
    """
    samples = np.asarray(samples, dtype=np.float64)
    preds = np.asarray(preds)
    query = np.asarray(query, dtype=np.float64)
    unlike = np.flatnonzero(preds != query_pred)
    if unlike.size == 0:
        raise NoUnlikeNeighborError("no sample with a different prediction")
    d = np.linalg.norm(samples[unlike] - query[None, :], axis=1)
    best = unlike[int(np.argmin(d))]  # argmin takes the first minimum
    return int(best), samples[best]


def native_guide_cf(
    model: Model,
    query,
    attribution,
    nun,
    window0: int = 0,
    grow: int = 0,
    origin_index: int = -1,
) -> Counterfactual:
    """Transplant the nearest unlike neighbor's values over the most relevant
    window, growing the window symmetrically until the class flips.

    window0/grow default to ceil(T/10) and ceil(T/20). Exhausting the window
    to full length returns a copy of the neighbor flagged degenerate.
    """
    query = check_series(query, model.input_length, "query").astype(np.float64)
    nun = check_series(nun, model.input_length, "nun").astype(np.float64)
    attr = np.abs(np.asarray(attribution, dtype=np.float64))
    if attr.shape != query.shape:
        raise InvalidParamsError("attribution must align with the query")
    T = query.size
    if window0 <= 0:
        window0 = int(np.ceil(T / 10))
    if grow <= 0:
        grow = int(np.ceil(T / 20))
    window0 = min(window0, T)

    query_pred = int(model.predict(query[None, :])[0])
    if int(model.predict(nun[None, :])[0]) == query_pred:
        raise InvalidParamsError("neighbor has the same prediction as the query")

    # contiguous window of length window0 with the largest attribution mass
    sums = np.convolve(attr, np.ones(window0), mode="valid")
    a = int(np.argmax(sums))
    b = a + window0

    while True:
        candidate = query.copy()
        candidate[a:b] = nun[a:b]
        pred = int(model.predict(candidate[None, :])[0])
        # a full window makes the candidate the neighbor itself, whose
        # prediction differs by precondition, so the loop always terminates
        full = a == 0 and b == T
        if pred != query_pred or full:
            mask = np.zeros(T, dtype=bool)
            mask[a:b] = True
            return _finish(origin_index, query, candidate, pred, "native", mask, degenerate=full)
        a = max(0, a - grow)
        b = min(T, b + grow)


def wachter_cf(
    model: Model,
    query,
    target_class: int,
    lambda0: float = 0.1,
    lambda_mult: float = 2.0,
    inner_iters: int = 100,
    max_iters: int = 2000,
    lr: float = 0.01,
    origin_index: int = -1,
) -> Counterfactual:
    """Adam descent on lambda * hinge(margin) + L1(x' - x); returns the first
    iterate whose argmax equals the target class."""
    query = check_series(query, model.input_length, "query").astype(np.float64)
    if not 0 <= target_class < model.class_count:
        raise InvalidParamsError(f"target class {target_class} out of range")
    if int(model.predict(query[None, :])[0]) == target_class:
        raise InvalidParamsError("target class equals the current prediction")
    if max_iters < 1 or inner_iters < 1 or lr <= 0:
        raise InvalidParamsError("need max_iters >= 1, inner_iters >= 1, lr > 0")

    x = query.copy()
    lam = float(lambda0)
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    others = [c for c in range(model.class_count) if c != target_class]

    for it in range(1, max_iters + 1):
        logits = model.logits(x[None, :])[0]
        rival = others[int(np.argmax(logits[others]))]
        margin = logits[rival] - logits[target_class]

        grad = np.sign(x - query)
        if margin > 0:
            dlogits = np.zeros((1, model.class_count))
            dlogits[0, rival] = 1.0
            dlogits[0, target_class] = -1.0
            grad = grad + lam * model.input_gradients(x[None, :], dlogits)[0]

        m = beta1 * m + (1 - beta1) * grad
        v = beta2 * v + (1 - beta2) * grad * grad
        step = lr * (m / (1 - beta1**it)) / (np.sqrt(v / (1 - beta2**it)) + eps)
        x = x - step

        pred = int(model.predict(x[None, :])[0])
        if pred == target_class:
            mask = np.abs(x - query) > 1e-6
            return _finish(origin_index, query, x, pred, "wachter", mask)
        if it % inner_iters == 0:
            lam *= lambda_mult
    raise NoFlipWithinBudgetError(f"no flip within {max_iters} iterations")
