"""Dataset ingestion, normalization, and confusion-matrix bookkeeping.

Datasets are labeled univariate series of uniform length in the UCR text
format: one sample per line, ``label<delim>v1<delim>...<delim>vT`` with a tab
or comma delimiter. Lines starting with ``#`` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInputError,
    InvalidParamsError,
    NonNumericError,
    RaggedRowsError,
)

TRAIN = "train"
TEST = "test"

# Tableau-style palette used for binary confusion categories.
CONFUSION_COLORS = {
    "TP": "#4e79a7",
    "TN": "#76b7b2",
    "FP": "#f28e2c",
    "FN": "#e15759",
}


@dataclass(frozen=True)
class ConfusionCell:
    """Classification outcome of one (true, predicted) pair."""

    true_class: int
    pred_class: int
    category: str | None  # TP|TN|FP|FN for binary data, None otherwise
    color_index: int

    @property
    def color(self) -> str | None:
        return CONFUSION_COLORS.get(self.category) if self.category else None


@dataclass(frozen=True)
class TimeSeriesDataset:
    """Labeled univariate series of uniform length with a train/test split.

    Labels are contiguous indices 0..k-1; ``label_values`` maps each index back
    to the original label as it appeared in the source file (ascending order).
    """

    samples: np.ndarray  # (N, T) float32
    labels: np.ndarray  # (N,) int64 in [0, class_count)
    split: np.ndarray  # (N,) '<U5', entries in {"train", "test"}
    class_count: int
    label_values: tuple[float, ...] = field(default=())

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        labels = np.asarray(self.labels, dtype=np.int64)
        split = np.asarray(self.split)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "split", split)
        if samples.ndim != 2 or samples.shape[1] < 2:
            raise InvalidParamsError("samples must be (N, T) with T >= 2")
        if labels.shape != (samples.shape[0],) or split.shape != (samples.shape[0],):
            raise InvalidParamsError("labels/split must align with samples")
        if self.class_count < 2:
            raise InvalidParamsError("class_count must be >= 2")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise InvalidParamsError("labels must lie in [0, class_count)")
        samples.setflags(write=False)
        labels.setflags(write=False)
        split.setflags(write=False)

    @property
    def length(self) -> int:
        return int(self.samples.shape[1])

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    def indices(self, split: str) -> np.ndarray:
        return np.flatnonzero(self.split == split)

    def subset(self, idx) -> "TimeSeriesDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return TimeSeriesDataset(
            samples=self.samples[idx].copy(),
            labels=self.labels[idx].copy(),
            split=self.split[idx].copy(),
            class_count=self.class_count,
            label_values=self.label_values,
        )


def _detect_delimiter(line: str) -> str:
    return "\t" if "\t" in line else ","


def _parse_rows(text: str, delimiter: str):
    """Shared line parser: (samples f32 matrix, original label values)."""
    rows: list[list[float]] = []
    raw_labels: list[float] = []
    delim: str | None = None if delimiter == "auto" else delimiter
    if delim == "tab":
        delim = "\t"
    elif delim == "comma":
        delim = ","

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if delim is None:
            delim = _detect_delimiter(stripped)
        fields = [f for f in stripped.split(delim) if f.strip() != ""]
        try:
            values = [float(f) for f in fields]
        except ValueError as exc:
            raise NonNumericError(f"line {lineno}: non-numeric field ({exc})") from None
        if len(values) < 2:
            raise RaggedRowsError(f"line {lineno}: expected label plus values")
        raw_labels.append(values[0])
        rows.append(values[1:])

    if not rows:
        raise EmptyInputError("no data lines found")
    width = len(rows[0])
    for row in rows:
        if len(row) != width:
            raise RaggedRowsError(f"line with {len(row)} values among {width}-value lines")
    return np.array(rows, dtype=np.float32), raw_labels


def parse_ucr(text: str, delimiter: str = "auto", split: str = TRAIN) -> TimeSeriesDataset:
    """Parse a UCR-format text blob into a dataset.

    Original labels are remapped to contiguous indices 0..k-1 in ascending
    order of the original values. All samples receive the given split tag.
    """
    samples, raw_labels = _parse_rows(text, delimiter)
    uniques = sorted(set(raw_labels))
    index_of = {v: i for i, v in enumerate(uniques)}
    labels = np.array([index_of[v] for v in raw_labels], dtype=np.int64)
    return TimeSeriesDataset(
        samples=samples,
        labels=labels,
        split=np.full(len(samples), split),
        class_count=len(uniques),
        label_values=tuple(uniques),
    )


def serialize_ucr(dataset: TimeSeriesDataset, delimiter: str = "\t") -> str:
    """Write a dataset back to UCR text using the original label values."""
    delim = {"tab": "\t", "comma": ","}.get(delimiter, delimiter)
    lines = []
    for row, label in zip(dataset.samples, dataset.labels):
        original = dataset.label_values[label] if dataset.label_values else float(label)
        fields = [repr(float(original))] + [repr(float(v)) for v in row]
        lines.append(delim.join(fields))
    return "\n".join(lines) + "\n"


def load_ucr_files(train_path: str, test_path: str, delimiter: str = "auto") -> TimeSeriesDataset:
    """Load a train/test file pair into one dataset with a unified label map.

    The label map is built over both files together, so either file alone may
    contain a subset of the classes (even just one).
    """
    with open(train_path, "r", encoding="utf-8") as fh:
        train_samples, train_raw = _parse_rows(fh.read(), delimiter)
    with open(test_path, "r", encoding="utf-8") as fh:
        test_samples, test_raw = _parse_rows(fh.read(), delimiter)
    if train_samples.shape[1] != test_samples.shape[1]:
        raise RaggedRowsError(
            f"series length mismatch between splits: "
            f"{train_samples.shape[1]} vs {test_samples.shape[1]}"
        )
    uniques = sorted(set(train_raw) | set(test_raw))
    index_of = {v: i for i, v in enumerate(uniques)}
    labels = np.array([index_of[v] for v in train_raw + test_raw], dtype=np.int64)
    return TimeSeriesDataset(
        samples=np.concatenate([train_samples, test_samples]),
        labels=labels,
        split=np.array([TRAIN] * len(train_raw) + [TEST] * len(test_raw)),
        class_count=len(uniques),
        label_values=tuple(uniques),
    )


def concat_datasets(train: TimeSeriesDataset, test: TimeSeriesDataset) -> TimeSeriesDataset:
    """Merge two parsed datasets, reconciling their original label values."""
    if train.length != test.length:
        raise RaggedRowsError(
            f"series length mismatch between splits: {train.length} vs {test.length}"
        )
    uniques = sorted(set(train.label_values) | set(test.label_values))
    index_of = {v: i for i, v in enumerate(uniques)}

    def remap(ds: TimeSeriesDataset) -> np.ndarray:
        return np.array([index_of[ds.label_values[l]] for l in ds.labels], dtype=np.int64)

    return TimeSeriesDataset(
        samples=np.concatenate([train.samples, test.samples]),
        labels=np.concatenate([remap(train), remap(test)]),
        split=np.concatenate([train.split, test.split]),
        class_count=len(uniques),
        label_values=tuple(uniques),
    )


def z_normalize(series) -> np.ndarray:
    """Zero-mean, unit-variance scaling with the population std.

    Series with std below 1e-12 come back as all zeros instead of erroring;
    flat segments are common in real recordings.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise InvalidParamsError("z_normalize expects a 1-D series of length >= 2")
    std = x.std()
    if std < 1e-12:
        return np.zeros_like(x, dtype=np.float32)
    return ((x - x.mean()) / std).astype(np.float32)


def confusion_assign(true_class: int, pred_class: int, class_count: int = 2) -> ConfusionCell:
    """Map a (true, predicted) pair onto its confusion-matrix cell.

    For binary data class 1 is the positive class; the TP/TN/FP/FN category is
    only defined there. ``color_index`` enumerates cells row-major for any k.
    """
    if not (0 <= true_class < class_count and 0 <= pred_class < class_count):
        raise InvalidParamsError("class index outside [0, class_count)")
    category = None
    if class_count == 2:
        if true_class == 1:
            category = "TP" if pred_class == 1 else "FN"
        else:
            category = "FP" if pred_class == 1 else "TN"
    return ConfusionCell(
        true_class=int(true_class),
        pred_class=int(pred_class),
        category=category,
        color_index=int(true_class) * class_count + int(pred_class),
    )
