"""Local attribution methods: one relevance score per time point.

Every method targets the model's predicted class unless a target is given,
so explanations describe the decision actually made, including mistakes.
Values stay signed except saliency; consumers take |.| where needed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDesignError,
    InvalidParamsError,
    ShapeMismatchError,
    UnknownMethodError,
)
from .nn.model import Model, softmax
from .validation import check_class_index, check_series

log = logging.getLogger(__name__)

METHOD_NAMES = (
    "saliency",
    "grad_input",
    "integrated_gradients",
    "occlusion",
    "lime",
    "shapley_sampling",
    "random",
)


@dataclass
class Attribution:
    method: str
    values: np.ndarray  # (T,) float32
    target_class: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 1 or not np.all(np.isfinite(self.values)):
            raise ShapeMismatchError("attribution values must be a finite vector")


def _resolve_target(model: Model, x: np.ndarray, target_class) -> int:
    if target_class is None:
        return int(model.predict(x[None, :])[0])
    return check_class_index(target_class, model.class_count)


def segment_bounds(length: int, segments: int) -> list:
    """Near-equal contiguous (start, stop) spans covering [0, length)."""
    if not 1 <= segments <= length:
        raise InvalidParamsError(f"segments must be in [1, {length}]")
    base, extra = divmod(length, segments)
    bounds, start = [], 0
    for i in range(segments):
        stop = start + base + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


# -- gradient family --------------------------------------------------------


def attr_saliency(model: Model, x, target_class=None) -> Attribution:
    x = check_series(x, model.input_length, "x")
    c = _resolve_target(model, x.astype(np.float64), target_class)
    grad = model.backward_input(x, c)
    return Attribution("saliency", np.abs(grad), c)


def attr_grad_input(model: Model, x, target_class=None) -> Attribution:
    x = check_series(x, model.input_length, "x")
    c = _resolve_target(model, x.astype(np.float64), target_class)
    grad = model.backward_input(x, c)
    return Attribution("grad_input", grad * x, c)


def attr_integrated_gradients(
    model: Model, x, target_class=None, baseline=None, steps: int = 50
) -> Attribution:
    """Midpoint-rule path integral of gradients from baseline to x."""
    if steps < 1:
        raise InvalidParamsError("steps must be >= 1")
    x = check_series(x, model.input_length, "x").astype(np.float64)
    if baseline is None:
        baseline = np.zeros_like(x)
    else:
        baseline = check_series(baseline, model.input_length, "baseline").astype(np.float64)
    c = _resolve_target(model, x, target_class)

    delta = x - baseline
    alphas = (np.arange(steps) + 0.5) / steps
    points = baseline[None, :] + alphas[:, None] * delta[None, :]
    dlogits = np.zeros((steps, model.class_count))
    dlogits[:, c] = 1.0
    grads = model.input_gradients(points, dlogits)
    values = grads.mean(axis=0) * delta
    return Attribution(
        "integrated_gradients", values, c, {"steps": steps}
    )


# -- perturbation family ----------------------------------------------------


def attr_occlusion(
    model: Model,
    x,
    target_class=None,
    window: int = 0,
    stride: int = 1,
    replacement: str = "zero",
    global_mean: float = 0.0,
) -> Attribution:
    """Mean logit drop over every window covering each point.

    window <= 0 selects the default max(1, ceil(0.05 T)).
    """
    x = check_series(x, model.input_length, "x").astype(np.float64)
    T = x.size
    if window <= 0:
        window = max(1, int(np.ceil(0.05 * T)))
    if window > T or stride < 1:
        raise InvalidParamsError(f"window must be in [1, {T}] and stride >= 1")
    if replacement not in ("zero", "global_mean"):
        raise InvalidParamsError(f"unknown replacement {replacement!r}")
    fill = 0.0 if replacement == "zero" else float(global_mean)
    c = _resolve_target(model, x, target_class)

    starts = np.arange(0, T - window + 1, stride)
    batch = np.repeat(x[None, :], starts.size, axis=0)
    for row, s in enumerate(starts):
        batch[row, s : s + window] = fill
    base = model.logits(x[None, :])[0, c]
    drops = base - model.logits(batch)[:, c]

    sums = np.zeros(T)
    counts = np.zeros(T)
    for row, s in enumerate(starts):
        sums[s : s + window] += drops[row]
        counts[s : s + window] += 1.0
    values = np.divide(sums, counts, out=np.zeros(T), where=counts > 0)
    return Attribution(
        "occlusion", values, c,
        {"window": window, "stride": stride, "replacement": replacement},
    )


def attr_lime(
    model: Model,
    x,
    target_class=None,
    segments: int = 10,
    samples: int = 1000,
    kernel_width: float = 0.25,
    ridge_lambda: float = 1.0,
    seed=0,
) -> Attribution:
    """Weighted ridge surrogate over binary segment masks.

    Masked-out segments take the sample's own mean value; the regression
    target is the predicted-class probability and mask weights decay with
    cosine distance from the all-ones mask.
    """
    if samples < 2:
        raise InvalidParamsError("samples must be >= 2")
    if kernel_width <= 0 or ridge_lambda < 0:
        raise InvalidParamsError("need kernel_width > 0 and ridge_lambda >= 0")
    x = check_series(x, model.input_length, "x").astype(np.float64)
    T = x.size
    bounds = segment_bounds(T, segments)
    c = _resolve_target(model, x, target_class)
    fill = float(x.mean())

    rng = np.random.default_rng(seed)
    masks = rng.integers(0, 2, size=(samples, segments))
    if np.all(masks == masks[0]):
        raise DegenerateDesignError("all masks identical; increase samples")

    batch = np.repeat(x[None, :], samples, axis=0)
    for j, (a, b) in enumerate(bounds):
        off = masks[:, j] == 0
        batch[off, a:b] = fill
    y = softmax(model.logits(batch))[:, c]

    # cosine similarity to the all-ones mask; zero mask pinned to 0
    on = masks.sum(axis=1)
    sim = np.sqrt(on / segments)
    weights = np.exp(-((1.0 - sim) ** 2) / kernel_width**2)

    Z = np.column_stack([np.ones(samples), masks.astype(np.float64)])
    penalty = np.diag([0.0] + [ridge_lambda] * segments)
    A = Z.T @ (Z * weights[:, None]) + penalty
    rhs = Z.T @ (weights * y)
    coefs = np.linalg.solve(A, rhs)[1:]

    values = np.empty(T)
    for j, (a, b) in enumerate(bounds):
        values[a:b] = coefs[j]
    return Attribution(
        "lime", values, c,
        {"segments": segments, "samples": samples,
         "kernel_width": kernel_width, "ridge_lambda": ridge_lambda},
    )


def attr_shapley_sampling(
    model: Model,
    x,
    target_class=None,
    segments: int = 10,
    permutations: int = 500,
    seed=0,
) -> Attribution:
    """Monte-Carlo Shapley values over contiguous segments.

    Coalition value = target logit with out-of-coalition segments replaced
    by the sample mean; marginal contributions averaged over seeded random
    permutations (Castro-style sampling).
    """
    if permutations < 1:
        raise InvalidParamsError("permutations must be >= 1")
    x = check_series(x, model.input_length, "x").astype(np.float64)
    T = x.size
    bounds = segment_bounds(T, segments)
    c = _resolve_target(model, x, target_class)
    fill = float(x.mean())

    rng = np.random.default_rng(seed)
    # progressive series per permutation: empty coalition, then +1 segment each
    rows = []
    orders = np.empty((permutations, segments), dtype=np.int64)
    for p in range(permutations):
        order = rng.permutation(segments)
        orders[p] = order
        series = np.full(T, fill)
        rows.append(series.copy())
        for j in order:
            a, b = bounds[j]
            series[a:b] = x[a:b]
            rows.append(series.copy())
    block = np.asarray(rows)

    logits = np.empty(block.shape[0])
    chunk = 1024
    for s in range(0, block.shape[0], chunk):
        logits[s : s + chunk] = model.logits(block[s : s + chunk])[:, c]

    per_perm = logits.reshape(permutations, segments + 1)
    marginals = np.diff(per_perm, axis=1)  # contribution of the segment added at each step
    phi = np.zeros(segments)
    for p in range(permutations):
        phi[orders[p]] += marginals[p]
    phi /= permutations

    values = np.empty(T)
    for j, (a, b) in enumerate(bounds):
        values[a:b] = phi[j]
    return Attribution(
        "shapley_sampling", values, c,
        {"segments": segments, "permutations": permutations},
    )


def attr_random(T: int, seed=0) -> Attribution:
    """Uniform [0,1) noise; the ranking baseline every method must beat."""
    if T < 1:
        raise InvalidParamsError("T must be >= 1")
    values = np.random.default_rng(seed).random(T)
    return Attribution("random", values, 0)


# -- matrix construction ----------------------------------------------------

# rng stream tags keep per-sample draws decorrelated across methods
_STREAMS = {"lime": 21, "shapley_sampling": 22, "random": 23}


def compute_attribution(
    model: Model, x, method: str, target_class=None, sample_index: int = 0,
    seed: int = 0, params: dict | None = None,
) -> Attribution:
    """Dispatch one method by name with a per-sample derived rng stream."""
    params = dict(params or {})
    if method == "saliency":
        return attr_saliency(model, x, target_class)
    if method == "grad_input":
        return attr_grad_input(model, x, target_class)
    if method == "integrated_gradients":
        return attr_integrated_gradients(model, x, target_class, **params)
    if method == "occlusion":
        return attr_occlusion(model, x, target_class, **params)
    if method == "lime":
        return attr_lime(
            model, x, target_class,
            seed=[_STREAMS["lime"], sample_index, seed], **params,
        )
    if method == "shapley_sampling":
        return attr_shapley_sampling(
            model, x, target_class,
            seed=[_STREAMS["shapley_sampling"], sample_index, seed], **params,
        )
    if method == "random":
        x = np.asarray(x)
        return attr_random(x.size, seed=[_STREAMS["random"], sample_index, seed])
    raise UnknownMethodError(f"unknown attribution method {method!r}")


@dataclass
class AttributionMatrix:
    """Per-method blocks of (values (N,T), std (N,), params) over one sample set."""

    blocks: dict  # method -> {"params": dict, "values": f32 (N,T), "std": f32 (N,)}

    def methods(self) -> list:
        return sorted(self.blocks)

    def values(self, method: str) -> np.ndarray:
        return self.blocks[method]["values"]

    def to_doc(self) -> dict:
        doc = {}
        for name in sorted(self.blocks):
            block = self.blocks[name]
            doc[name] = {
                "params": block["params"],
                "values": np.asarray(block["values"], dtype=np.float32).tolist(),
                "std": np.asarray(block["std"], dtype=np.float32).tolist(),
            }
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "AttributionMatrix":
        blocks = {}
        for name, block in doc.items():
            values = np.asarray(block["values"], dtype=np.float32)
            blocks[name] = {
                "params": dict(block.get("params", {})),
                "values": values,
                "std": np.asarray(block["std"], dtype=np.float32),
            }
        return cls(blocks)


def build_attribution_matrix(
    model: Model, samples: np.ndarray, methods, seed: int = 0, params: dict | None = None
) -> AttributionMatrix:
    """Complete (sample x method) matrix with a per-sample std summary.

    `samples` is an (N, T) block; methods run independently per sample and
    results are keyed by index, so evaluation order does not matter.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ShapeMismatchError("samples must be (N, T)")
    params = params or {}
    n = samples.shape[0]
    blocks = {}
    for method in methods:
        if method not in METHOD_NAMES:
            raise UnknownMethodError(f"unknown attribution method {method!r}")
        method_params = dict(params.get(method, {}))
        values = np.empty((n, samples.shape[1]), dtype=np.float32)
        for i in range(n):
            attr = compute_attribution(
                model, samples[i], method,
                sample_index=i, seed=seed, params=method_params,
            )
            values[i] = attr.values
        std = values.std(axis=1)  # population std per sample vector
        blocks[method] = {"params": method_params, "values": values, "std": std}
        log.info("attributions %s: %d samples done", method, n)
    return AttributionMatrix(blocks)
