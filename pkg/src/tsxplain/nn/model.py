"""Model container, forward/backward passes, and manifest serialization.

Parameters are stored float32; every pass computes in float64 internally so
reductions (conv sums, softmax) accumulate at full precision. Softmax is
applied outside the layer stack: the final Dense layer emits the logits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import (
    ManifestParseError,
    ShapeMismatchError,
    UnknownLayerKindError,
)
from ..validation import check_class_index, check_series
from .layers import (
    Conv1D,
    Dense,
    Dropout,
    Flatten,
    LayerSpec,
    MaxPool1D,
    ReLU,
    output_shape,
)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax in float64, invariant to constant logit shifts."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class ForwardTrace:
    """Everything one forward pass produced, as float32 views."""

    layer_outputs: list  # per-layer output arrays
    logits: np.ndarray  # (class_count,)
    probabilities: np.ndarray  # softmax(logits)
    penultimate: np.ndarray  # input of the final Dense layer, flattened


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


class Model:
    """Ordered layer stack over univariate series of fixed length.

    The layer chain is shape-checked at construction; the final layer must be
    a Dense producing ``class_count`` logits.
    """

    def __init__(self, layers, input_length: int, class_count: int, params=None):
        if input_length < 1 or class_count < 2:
            raise ShapeMismatchError("need input_length >= 1 and class_count >= 2")
        self.layers: list[LayerSpec] = list(layers)
        self.input_length = int(input_length)
        self.class_count = int(class_count)
        if not self.layers or not isinstance(self.layers[-1], Dense):
            raise ShapeMismatchError("final layer must be Dense")

        shape = ("ch", 1, self.input_length)
        self.shapes = []
        for layer in self.layers:
            shape = output_shape(layer, shape)
            self.shapes.append(shape)
        if shape != ("flat", self.class_count):
            raise ShapeMismatchError(
                f"stack produces {shape}, expected ({self.class_count},) logits"
            )

        if params is None:
            params = [self._zero_params(l) for l in self.layers]
        self.params = params
        self._check_params()

    # -- construction -----------------------------------------------------

    @staticmethod
    def _zero_params(layer: LayerSpec):
        if isinstance(layer, Conv1D):
            return {
                "W": np.zeros((layer.out_ch, layer.in_ch, layer.kernel), dtype=np.float32),
                "b": np.zeros(layer.out_ch, dtype=np.float32),
            }
        if isinstance(layer, Dense):
            return {
                "W": np.zeros((layer.out_features, layer.in_features), dtype=np.float32),
                "b": np.zeros(layer.out_features, dtype=np.float32),
            }
        return None

    def _check_params(self):
        if len(self.params) != len(self.layers):
            raise ShapeMismatchError("params must align with layers")
        for layer, p in zip(self.layers, self.params):
            if isinstance(layer, Conv1D):
                want_w = (layer.out_ch, layer.in_ch, layer.kernel)
                want_b = (layer.out_ch,)
            elif isinstance(layer, Dense):
                want_w = (layer.out_features, layer.in_features)
                want_b = (layer.out_features,)
            else:
                if p is not None:
                    raise ShapeMismatchError(f"{layer} takes no parameters")
                continue
            if p is None or p["W"].shape != want_w or p["b"].shape != want_b:
                raise ShapeMismatchError(
                    f"{layer} parameter shapes {None if p is None else (p['W'].shape, p['b'].shape)}"
                    f" do not match {want_w}/{want_b}"
                )
            p["W"] = np.asarray(p["W"], dtype=np.float32)
            p["b"] = np.asarray(p["b"], dtype=np.float32)

    @classmethod
    def initialized(cls, layers, input_length: int, class_count: int, seed: int = 0) -> "Model":
        """Glorot-uniform weights, zero biases, drawn from one seeded stream."""
        model = cls(layers, input_length, class_count)
        rng = np.random.default_rng(seed)
        for layer, p in zip(model.layers, model.params):
            if isinstance(layer, Conv1D):
                fan_in = layer.in_ch * layer.kernel
                fan_out = layer.out_ch * layer.kernel
                p["W"] = glorot_uniform(rng, p["W"].shape, fan_in, fan_out)
            elif isinstance(layer, Dense):
                p["W"] = glorot_uniform(rng, p["W"].shape, layer.in_features, layer.out_features)
        return model

    # -- forward ----------------------------------------------------------

    def _run(self, X: np.ndarray, dropout_active: bool, rng, need_cache: bool):
        """Batched pass in float64. Returns (logits, per-layer outputs, caches)."""
        a = np.asarray(X, dtype=np.float64)[:, None, :]  # (N, 1, T) channel form
        outputs = [] if need_cache else None
        caches = [] if need_cache else None

        for layer, p in zip(self.layers, self.params):
            cache = None
            if isinstance(layer, Conv1D):
                W = p["W"].astype(np.float64)
                out = _conv_forward(a, W, p["b"].astype(np.float64), layer.stride)
                cache = ("conv", a, W, layer.stride)
                a = out
            elif isinstance(layer, ReLU):
                cache = ("relu", a > 0)
                a = np.maximum(a, 0.0)
            elif isinstance(layer, MaxPool1D):
                out, idx, in_shape = _maxpool_forward(a, layer.size)
                cache = ("maxpool", idx, in_shape, layer.size)
                a = out
            elif isinstance(layer, Flatten):
                cache = ("reshape", a.shape)
                a = a.reshape(a.shape[0], -1)
            elif isinstance(layer, Dense):
                orig_shape = a.shape
                if a.ndim == 3:  # implicit flatten
                    a = a.reshape(a.shape[0], -1)
                W = p["W"].astype(np.float64)
                cache = ("dense", a, W, orig_shape)
                a = a @ W.T + p["b"].astype(np.float64)
            elif isinstance(layer, Dropout):
                if dropout_active:
                    keep = rng.random(a.shape) >= layer.p
                    scale = keep / (1.0 - layer.p)
                    cache = ("dropout", scale)
                    a = a * scale
                else:
                    cache = ("dropout", None)
            if need_cache:
                outputs.append(a)
                caches.append(cache)
        return a, outputs, caches

    def logits(self, X: np.ndarray, dropout_active: bool = False, rng=None) -> np.ndarray:
        """Logits for a batch (N, T), float64."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_length:
            raise ShapeMismatchError(f"batch shape {X.shape} != (N, {self.input_length})")
        out, _, _ = self._run(X, dropout_active, rng, need_cache=False)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.logits(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1)

    def forward(self, x, dropout_active: bool = False, rng_seed: int = 0) -> ForwardTrace:
        """Full trace for one series; deterministic given (x, flag, seed)."""
        x = check_series(x, self.input_length, "input")
        rng = np.random.default_rng(rng_seed)
        logits, outputs, caches = self._run(
            x[None, :].astype(np.float64), dropout_active, rng, need_cache=True
        )
        # Input of the final Dense layer, after any implicit flatten.
        final_cache = caches[-1]
        penultimate = final_cache[1][0].astype(np.float32)
        logits64 = logits[0]
        return ForwardTrace(
            layer_outputs=[o[0].astype(np.float32) for o in outputs],
            logits=logits64.astype(np.float32),
            probabilities=softmax(logits64).astype(np.float32),
            penultimate=penultimate,
        )

    def activations(self, X: np.ndarray) -> np.ndarray:
        """Penultimate vectors (input of the final Dense) for a batch, float32."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_length:
            raise ShapeMismatchError(f"batch shape {X.shape} != (N, {self.input_length})")
        _, _, caches = self._run(X, False, None, need_cache=True)
        return caches[-1][1].astype(np.float32)

    def logit_f64(self, x, target_class: int) -> float:
        """One logit at full float64 precision; the finite-difference probe."""
        target_class = check_class_index(target_class, self.class_count)
        return float(self.logits(np.asarray(x, dtype=np.float64)[None, :])[0, target_class])

    # -- backward ---------------------------------------------------------

    def input_gradients(self, X: np.ndarray, dlogits: np.ndarray, caches=None) -> np.ndarray:
        """d(dlogits . logits)/dX for a batch, float64. Dropout inactive."""
        X = np.asarray(X, dtype=np.float64)
        if caches is None:
            _, _, caches = self._run(X, False, None, need_cache=True)
        g = np.asarray(dlogits, dtype=np.float64)
        g, _ = _backward(self.layers, caches, g, collect_param_grads=False)
        return g[:, 0, :]

    def backward_input(self, x, target_class: int) -> np.ndarray:
        """Gradient of the target logit w.r.t. the input series, float32."""
        x = check_series(x, self.input_length, "input")
        target_class = check_class_index(target_class, self.class_count)
        dlogits = np.zeros((1, self.class_count))
        dlogits[0, target_class] = 1.0
        return self.input_gradients(x[None, :].astype(np.float64), dlogits)[0].astype(np.float32)

    # -- serialization ----------------------------------------------------

    def to_manifest(self) -> dict:
        layers = []
        for layer, p in zip(self.layers, self.params):
            if isinstance(layer, Conv1D):
                layers.append(
                    {
                        "kind": "conv1d",
                        "in": layer.in_ch,
                        "out": layer.out_ch,
                        "kernel": layer.kernel,
                        "stride": layer.stride,
                        "weights": p["W"].astype(np.float32).tolist(),
                        "bias": p["b"].astype(np.float32).tolist(),
                    }
                )
            elif isinstance(layer, ReLU):
                layers.append({"kind": "relu"})
            elif isinstance(layer, MaxPool1D):
                layers.append({"kind": "maxpool1d", "size": layer.size})
            elif isinstance(layer, Flatten):
                layers.append({"kind": "flatten"})
            elif isinstance(layer, Dense):
                layers.append(
                    {
                        "kind": "dense",
                        "in": layer.in_features,
                        "out": layer.out_features,
                        "weights": p["W"].astype(np.float32).tolist(),
                        "bias": p["b"].astype(np.float32).tolist(),
                    }
                )
            elif isinstance(layer, Dropout):
                layers.append({"kind": "dropout", "p": layer.p})
        return {
            "input_length": self.input_length,
            "classes": self.class_count,
            "layers": layers,
        }

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_manifest(), fh)

    @classmethod
    def from_manifest(cls, manifest: dict) -> "Model":
        try:
            input_length = int(manifest["input_length"])
            classes = int(manifest["classes"])
            layer_docs = manifest["layers"]
            if not isinstance(layer_docs, list):
                raise TypeError("layers must be a list")
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestParseError(f"bad manifest structure: {exc}") from None

        layers: list[LayerSpec] = []
        params = []
        for i, doc in enumerate(layer_docs):
            try:
                kind = doc["kind"]
            except (KeyError, TypeError) as exc:
                raise ManifestParseError(f"layer {i}: missing kind ({exc})") from None
            if kind == "conv1d":
                spec, p = _parse_weighted(
                    doc, i, lambda d: Conv1D(d["in"], d["out"], d["kernel"], d.get("stride", 1))
                )
            elif kind == "dense":
                spec, p = _parse_weighted(doc, i, lambda d: Dense(d["in"], d["out"]))
            elif kind == "relu":
                spec, p = ReLU(), None
            elif kind == "maxpool1d":
                try:
                    spec, p = MaxPool1D(int(doc["size"])), None
                except (KeyError, TypeError, ValueError) as exc:
                    raise ManifestParseError(f"layer {i}: {exc}") from None
            elif kind == "flatten":
                spec, p = Flatten(), None
            elif kind == "dropout":
                try:
                    spec, p = Dropout(float(doc["p"])), None
                except (KeyError, TypeError, ValueError) as exc:
                    raise ManifestParseError(f"layer {i}: {exc}") from None
            else:
                raise UnknownLayerKindError(f"layer {i}: unknown kind {kind!r}")
            layers.append(spec)
            params.append(p)
        return cls(layers, input_length, classes, params)

    @classmethod
    def load(cls, path: str) -> "Model":
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
        try:
            manifest = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ManifestParseError(f"invalid JSON: {exc}") from None
        return cls.from_manifest(manifest)


def _parse_weighted(doc: dict, i: int, build):
    try:
        spec = build(doc)
        W = np.asarray(doc["weights"], dtype=np.float32)
        b = np.asarray(doc["bias"], dtype=np.float32)
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestParseError(f"layer {i}: {exc}") from None
    return spec, {"W": W, "b": b}


# -- layer kernels (float64, batched) -------------------------------------


def _conv_forward(X: np.ndarray, W: np.ndarray, b: np.ndarray, stride: int) -> np.ndarray:
    _, _, length = X.shape
    out_ch, _, kernel = W.shape
    out_len = (length - kernel) // stride + 1
    out = np.zeros((X.shape[0], out_ch, out_len))
    for j in range(kernel):
        xs = X[:, :, j : j + (out_len - 1) * stride + 1 : stride]
        out += np.einsum("oc,bcl->bol", W[:, :, j], xs)
    return out + b[None, :, None]


def _maxpool_forward(X: np.ndarray, size: int):
    n, c, length = X.shape
    out_len = length // size
    windows = X[:, :, : out_len * size].reshape(n, c, out_len, size)
    # argmax takes the first maximal entry, which fixes the gradient routing
    idx = windows.argmax(axis=3)
    out = np.take_along_axis(windows, idx[..., None], axis=3)[..., 0]
    return out, idx, X.shape


def _backward(layers, caches, dlogits: np.ndarray, collect_param_grads: bool):
    """Reverse pass from dL/dlogits; returns (dX in (N,1,T), param grads)."""
    g = dlogits
    grads = [None] * len(layers) if collect_param_grads else None
    for i in range(len(layers) - 1, -1, -1):
        cache = caches[i]
        kind = cache[0] if cache else None
        if kind == "conv":
            _, X, W, stride = cache
            g, dW, db = _conv_backward(g, X, W, stride, collect_param_grads)
            if collect_param_grads:
                grads[i] = {"W": dW, "b": db}
        elif kind == "relu":
            g = g * cache[1]
        elif kind == "maxpool":
            _, idx, in_shape, size = cache
            g = _maxpool_backward(g, idx, in_shape, size)
        elif kind == "reshape":
            g = g.reshape(cache[1])
        elif kind == "dense":
            _, X, W, orig_shape = cache
            if collect_param_grads:
                grads[i] = {"W": g.T @ X, "b": g.sum(axis=0)}
            g = (g @ W).reshape(orig_shape)
        elif kind == "dropout":
            if cache[1] is not None:
                g = g * cache[1]
    return g, grads


def _conv_backward(g, X, W, stride, collect):
    _, _, length = X.shape
    _, _, kernel = W.shape
    out_len = g.shape[2]
    dX = np.zeros_like(X)
    dW = np.zeros_like(W) if collect else None
    for j in range(kernel):
        sl = slice(j, j + (out_len - 1) * stride + 1, stride)
        dX[:, :, sl] += np.einsum("oc,bol->bcl", W[:, :, j], g)
        if collect:
            dW[:, :, j] = np.einsum("bol,bcl->oc", g, X[:, :, sl])
    db = g.sum(axis=(0, 2)) if collect else None
    return dX, dW, db


def _maxpool_backward(g, idx, in_shape, size):
    n, c, length = in_shape
    out_len = length // size
    d4 = np.zeros((n, c, out_len, size))
    np.put_along_axis(d4, idx[..., None], g[..., None], axis=3)
    dX = np.zeros((n, c, length))
    dX[:, :, : out_len * size] = d4.reshape(n, c, out_len * size)
    return dX
