"""Perturbation analysis: does destroying "relevant" points hurt the model?

Scores each attribution method by the accuracy drop its selections cause on
the test split, compares against a random-selection baseline of the same
size, and ranks methods by mean drop across a strategy grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attributions import AttributionMatrix, attr_random
from .errors import IndexOutOfRangeError, InvalidParamsError, MissingAttributionsError
from .nn.model import Model

_RANDOM_STREAM = 31

POINT_STRATEGIES = ("zero", "inverse", "mean", "min", "max")
TIME_STRATEGIES = POINT_STRATEGIES + ("swap",)


@dataclass(frozen=True)
class TopPercent:
    p: float

    def __post_init__(self):
        if not 0 < self.p <= 100:
            raise InvalidParamsError("p must be in (0, 100]")


@dataclass(frozen=True)
class AbsValue:
    v: float

    def __post_init__(self):
        if not np.isfinite(self.v):
            raise InvalidParamsError("threshold value must be finite")


@dataclass(frozen=True)
class PerturbationConfig:
    regime: str = "point"
    strategy: str = "zero"
    threshold: object = TopPercent(10.0)
    span: int = 5
    compare_random: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.regime not in ("point", "time"):
            raise InvalidParamsError(f"unknown regime {self.regime!r}")
        allowed = TIME_STRATEGIES if self.regime == "time" else POINT_STRATEGIES
        if self.strategy not in allowed:
            raise InvalidParamsError(
                f"strategy {self.strategy!r} not valid for regime {self.regime!r}"
            )
        if not isinstance(self.threshold, (TopPercent, AbsValue)):
            raise InvalidParamsError("threshold must be TopPercent or AbsValue")
        if self.span < 1:
            raise InvalidParamsError("span must be >= 1")

    def label(self) -> str:
        if isinstance(self.threshold, TopPercent):
            thr = f"top{self.threshold.p:g}"
        else:
            thr = f"abs{self.threshold.v:g}"
        tail = f"/L{self.span}" if self.regime == "time" else ""
        return f"{self.regime}/{self.strategy}@{thr}{tail}"


@dataclass(frozen=True)
class DatasetStats:
    """Global scalars used as perturbation fill values."""

    mean: float
    min: float
    max: float

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "DatasetStats":
        samples = np.asarray(samples, dtype=np.float64)
        if samples.size == 0:
            raise InvalidParamsError("cannot take stats of an empty block")
        return cls(float(samples.mean()), float(samples.min()), float(samples.max()))


@dataclass
class EvalResult:
    method: str
    config: PerturbationConfig
    acc_before: float
    acc_after: float
    drop: float
    random_drop: float | None = None
    beats_random: bool = False


def select_relevant(values: np.ndarray, threshold) -> np.ndarray:
    """Ascending indices of the relevant points under |values|."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise InvalidParamsError("values must be a nonempty vector")
    mags = np.abs(values)
    if isinstance(threshold, TopPercent):
        k = int(np.ceil(threshold.p * values.size / 100.0))
        # stable sort on -|v| keeps equal magnitudes in index order
        order = np.argsort(-mags, kind="stable")
        return np.sort(order[:k])
    if isinstance(threshold, AbsValue):
        return np.flatnonzero(mags >= threshold.v)
    raise InvalidParamsError("threshold must be TopPercent or AbsValue")


def _merged_windows(indices: np.ndarray, span: int, length: int) -> list:
    """Centered spans around each index, clamped and merged where they overlap."""
    half = (span - 1) // 2
    raw = []
    for i in indices:
        a = max(0, int(i) - half)
        b = min(length, int(i) - half + span)
        raw.append((a, b))
    raw.sort()
    merged = []
    for a, b in raw:
        if merged and a < merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def perturb(series, indices, config: PerturbationConfig, stats: DatasetStats) -> np.ndarray:
    """Return a perturbed copy; untouched points are bitwise identical."""
    x = np.asarray(series, dtype=np.float64).copy()
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= x.size):
        raise IndexOutOfRangeError("selection outside [0, T)")

    fills = {"zero": 0.0, "mean": stats.mean, "min": stats.min, "max": stats.max}
    if config.regime == "point":
        if config.strategy == "inverse":
            x[idx] = -x[idx]
        else:
            x[idx] = fills[config.strategy]
        return x

    for a, b in _merged_windows(idx, config.span, x.size):
        if config.strategy == "swap":
            x[a:b] = x[a:b][::-1]
        elif config.strategy == "inverse":
            x[a:b] = -x[a:b]
        else:
            x[a:b] = fills[config.strategy]
    return x


def _accuracy(model: Model, samples: np.ndarray, labels: np.ndarray) -> float:
    return float((model.predict(samples) == labels).mean())


def evaluate_method(
    model: Model,
    samples: np.ndarray,
    labels: np.ndarray,
    values: np.ndarray,
    config: PerturbationConfig,
    stats: DatasetStats,
    method: str = "",
) -> EvalResult:
    """Accuracy drop when each sample is perturbed at its selected indices."""
    samples = np.asarray(samples, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != samples.shape:
        raise MissingAttributionsError(
            f"attribution block {values.shape} does not cover samples {samples.shape}"
        )

    acc_before = _accuracy(model, samples, labels)
    perturbed = np.empty_like(samples)
    counts = np.empty(samples.shape[0], dtype=np.int64)
    for i in range(samples.shape[0]):
        idx = select_relevant(values[i], config.threshold)
        counts[i] = idx.size
        perturbed[i] = perturb(samples[i], idx, config, stats)
    acc_after = _accuracy(model, perturbed, labels)
    result = EvalResult(method, config, acc_before, acc_after, acc_before - acc_after)

    if config.compare_random:
        rand_pert = np.empty_like(samples)
        for i in range(samples.shape[0]):
            noise = attr_random(
                samples.shape[1], seed=[_RANDOM_STREAM, i, config.seed]
            ).values
            order = np.argsort(-np.abs(noise.astype(np.float64)), kind="stable")
            idx = np.sort(order[: counts[i]])
            rand_pert[i] = perturb(samples[i], idx, config, stats)
        acc_random = _accuracy(model, rand_pert, labels)
        result.random_drop = acc_before - acc_random
        result.beats_random = result.drop > result.random_drop
    return result


def default_config_grid(seed: int = 0) -> list:
    """The automatic-phase grid: point and time regimes over the core strategies."""
    grid = []
    for strategy in ("zero", "inverse", "mean"):
        grid.append(PerturbationConfig("point", strategy, TopPercent(10.0), seed=seed))
    for strategy in ("zero", "inverse", "mean", "swap"):
        grid.append(
            PerturbationConfig("time", strategy, TopPercent(10.0), span=5, seed=seed)
        )
    return grid


@dataclass
class RankEntry:
    method: str
    mean_drop: float
    mean_random_drop: float | None
    beats_random: bool
    drops: dict = field(default_factory=dict)  # config label -> drop


def rank_methods(results) -> list:
    """Order methods by mean drop, best first; ties fall back to the name."""
    results = list(results)
    if not results:
        raise InvalidParamsError("need at least one result to rank")
    by_method: dict = {}
    for r in results:
        by_method.setdefault(r.method, []).append(r)

    entries = []
    for method in sorted(by_method):
        rs = by_method[method]
        drops = {r.config.label(): r.drop for r in rs}
        mean_drop = float(np.mean([r.drop for r in rs]))
        randoms = [r.random_drop for r in rs if r.random_drop is not None]
        mean_random = float(np.mean(randoms)) if randoms else None
        beats = mean_random is not None and mean_drop > mean_random
        entries.append(RankEntry(method, mean_drop, mean_random, beats, drops))
    entries.sort(key=lambda e: (-e.mean_drop, e.method))
    return entries


def evaluate_grid(
    model: Model,
    samples: np.ndarray,
    labels: np.ndarray,
    matrix: AttributionMatrix,
    configs=None,
    stats: DatasetStats | None = None,
) -> list:
    """Every (method, config) EvalResult for the grid, in a fixed order."""
    if configs is None:
        configs = default_config_grid()
    if stats is None:
        stats = DatasetStats.from_samples(samples)
    results = []
    for method in matrix.methods():
        values = matrix.values(method)
        for config in configs:
            results.append(
                evaluate_method(model, samples, labels, values, config, stats, method)
            )
    return results


def ranking_table(entries, configs=None) -> dict:
    """JSON-ready table: ordered methods x config columns, cells = drop."""
    if configs is None:
        columns = sorted({label for e in entries for label in e.drops})
    else:
        columns = [c.label() for c in configs]
    return {
        "columns": columns,
        "methods": [e.method for e in entries],
        "cells": {e.method: {c: e.drops.get(c) for c in columns} for e in entries},
        "mean_drop": {e.method: e.mean_drop for e in entries},
        "mean_random_drop": {e.method: e.mean_random_drop for e in entries},
        "beats_random": {e.method: e.beats_random for e in entries},
    }
