"""Input validation helpers used at the public API boundaries."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, InvalidParamsError, ShapeMismatchError


def check_series(x, length: int | None = None, name: str = "series") -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float32 vector, optionally of fixed length."""
    arr = np.asarray(x, dtype=np.float32)
    if arr.ndim != 1:
        raise ShapeMismatchError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ShapeMismatchError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParamsError(f"{name} contains non-finite values")
    return arr


def check_matrix(X, min_rows: int = 1, min_cols: int = 1, name: str = "matrix") -> np.ndarray:
    """Coerce ``X`` to a finite 2-D float64 array with minimum dimensions."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    n, d = arr.shape
    if n < min_rows or d < min_cols:
        raise InvalidParamsError(
            f"{name} must be at least {min_rows}x{min_cols}, got {n}x{d}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidParamsError(f"{name} contains non-finite values")
    return arr


def check_row_matches(row: np.ndarray, n_features: int, name: str = "row") -> np.ndarray:
    """Validate an out-of-sample row against a fitted feature dimension."""
    arr = np.asarray(row, dtype=np.float64).ravel()
    if arr.shape[0] != n_features:
        raise DimensionMismatchError(
            f"{name} has {arr.shape[0]} features, fitted state expects {n_features}"
        )
    return arr


def check_class_index(c: int, class_count: int) -> int:
    if not 0 <= int(c) < class_count:
        raise InvalidParamsError(f"class index {c} outside [0, {class_count})")
    return int(c)


def check_range(a: int, b: int, length: int) -> tuple[int, int]:
    """Validate an inclusive index range [a, b] inside [0, length)."""
    a, b = int(a), int(b)
    if not (0 <= a <= b < length):
        raise InvalidParamsError(f"range [{a}, {b}] invalid for length {length}")
    return a, b
