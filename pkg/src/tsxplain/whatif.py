"""Deterministic sample edits for the local what-if loop, plus neighbor
retrieval in raw, activation, and attribution spaces.

Edits never mutate their input and touch only the addressed index range;
everything outside stays bitwise identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    IndexOutOfRangeError,
    InvalidParamsError,
    MissingContextError,
    UnknownMethodError,
)
from .validation import check_range

REGION_OPS = ("actmax", "global_mean", "local_mean", "inverse", "moving_avg", "exp_smooth")


@dataclass(frozen=True)
class DragEdit:
    t: int
    value: float
    radius: int = 0

    def __post_init__(self):
        if self.t < 0 or self.radius < 0:
            raise InvalidParamsError("need t >= 0 and radius >= 0")
        if not np.isfinite(self.value):
            raise InvalidParamsError("drag value must be finite")


@dataclass(frozen=True)
class RegionEdit:
    a: int
    b: int  # inclusive
    op: str
    k: int = 3  # moving_avg window
    alpha: float = 0.5  # exp_smooth factor
    target_class: int | None = None  # actmax

    def __post_init__(self):
        if self.op not in REGION_OPS:
            raise InvalidParamsError(f"unknown region op {self.op!r}")
        if not 0 <= self.a <= self.b:
            raise InvalidParamsError("need 0 <= a <= b")
        if self.k < 1:
            raise InvalidParamsError("moving_avg window k must be >= 1")
        if not 0 < self.alpha <= 1:
            raise InvalidParamsError("alpha must be in (0, 1]")


@dataclass
class EditContext:
    """Dataset/model facts some region ops need."""

    global_mean: float | None = None
    actmax_lookup: object = None  # callable class -> (T,) series


def parse_edit(doc: dict):
    """EditOp from an API payload record."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InvalidParamsError("edit must be a record with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "drag":
            return DragEdit(int(doc["t"]), float(doc["value"]), int(doc.get("radius", 0)))
        if kind == "region":
            extra = {}
            if "k" in doc:
                extra["k"] = int(doc["k"])
            if "alpha" in doc:
                extra["alpha"] = float(doc["alpha"])
            if "target_class" in doc:
                extra["target_class"] = int(doc["target_class"])
            return RegionEdit(int(doc["a"]), int(doc["b"]), str(doc["op"]), **extra)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParamsError(f"bad edit record: {exc}") from None
    raise InvalidParamsError(f"unknown edit kind {kind!r}")


def drag_edit(series, t: int, value: float, radius: int = 0) -> np.ndarray:
    """Move point t to `value`, pulling neighbors along a Gaussian falloff.

    sigma = max(radius, 1) / 2, so the kernel is exactly 1 at the handle and
    the touched range is [t-radius, t+radius] clamped to the series.
    """
    x = np.asarray(series, dtype=np.float64).copy()
    if not 0 <= t < x.size:
        raise IndexOutOfRangeError(f"t={t} outside [0, {x.size})")
    if radius < 0:
        raise InvalidParamsError("radius must be >= 0")
    delta = float(value) - x[t]
    sigma = max(radius, 1) / 2.0
    lo, hi = max(0, t - radius), min(x.size - 1, t + radius)
    i = np.arange(lo, hi + 1)
    x[lo : hi + 1] += delta * np.exp(-((i - t) ** 2) / (2.0 * sigma**2))
    return x


def region_edit(series, a: int, b: int, op: str, context: EditContext | None = None, *,
                k: int = 3, alpha: float = 0.5, target_class=None) -> np.ndarray:
    """Apply one region operation over the inclusive range [a, b]."""
    x = np.asarray(series, dtype=np.float64).copy()
    a, b = check_range(a, b, x.size)
    edit = RegionEdit(a, b, op, k=k, alpha=alpha, target_class=target_class)
    context = context or EditContext()

    if op == "local_mean":
        x[a : b + 1] = x[a : b + 1].mean()
    elif op == "inverse":
        x[a : b + 1] = -x[a : b + 1]
    elif op == "global_mean":
        if context.global_mean is None:
            raise MissingContextError("global_mean needs dataset statistics")
        x[a : b + 1] = context.global_mean
    elif op == "actmax":
        if context.actmax_lookup is None or edit.target_class is None:
            raise MissingContextError("actmax needs a model context and a target class")
        proto = np.asarray(context.actmax_lookup(edit.target_class), dtype=np.float64)
        if proto.shape != x.shape:
            raise InvalidParamsError("activation-max series length mismatch")
        x[a : b + 1] = proto[a : b + 1]
    elif op == "moving_avg":
        # centered window over ORIGINAL values, clamped to the region
        orig = x[a : b + 1].copy()
        half = (edit.k - 1) // 2
        for i in range(orig.size):
            lo = max(0, i - half)
            hi = min(orig.size, i - half + edit.k)
            x[a + i] = orig[lo:hi].mean()
    elif op == "exp_smooth":
        s = x[a]
        for i in range(a + 1, b + 1):
            s = edit.alpha * x[i] + (1.0 - edit.alpha) * s
            x[i] = s
    return x


def apply_edits(series, edits, context: EditContext | None = None) -> np.ndarray:
    """Fold a list of EditOps left to right over a copy of the series."""
    x = np.asarray(series, dtype=np.float64).copy()
    for e in edits:
        if isinstance(e, DragEdit):
            x = drag_edit(x, e.t, e.value, e.radius)
        elif isinstance(e, RegionEdit):
            x = region_edit(
                x, e.a, e.b, e.op, context,
                k=e.k, alpha=e.alpha, target_class=e.target_class,
            )
        else:
            raise InvalidParamsError(f"unknown edit {e!r}")
    return x


def nearest_in_matrix(matrix, query_row, k: int, exclude_index: int | None = None):
    """k (index, distance) pairs, ascending distance, ties by lower index."""
    matrix = np.asarray(matrix, dtype=np.float64)
    query = np.asarray(query_row, dtype=np.float64).ravel()
    if matrix.ndim != 2 or matrix.shape[1] != query.size:
        raise InvalidParamsError(
            f"query length {query.size} does not match matrix width"
        )
    if k < 1:
        raise InvalidParamsError("k must be >= 1")
    d = cdist(query[None, :], matrix)[0]
    order = np.argsort(d, kind="stable")  # stable keeps ties in index order
    if exclude_index is not None:
        order = order[order != exclude_index]
    picked = order[:k]
    return [(int(i), float(d[i])) for i in picked]


def parse_space(space: str):
    """('euclidean'|'activations'|'attributions', method|None) from a name."""
    if space == "euclidean":
        return "euclidean", None
    if space == "activations":
        return "activations", None
    for prefix in ("attributions:", "attr:"):
        if space.startswith(prefix):
            method = space[len(prefix):]
            if method:
                return "attributions", method
    raise UnknownMethodError(f"unknown neighbor space {space!r}")
