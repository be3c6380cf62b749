"""Series transformations feeding the projection grid as extra sources.

All transforms are pure and deterministic; output lengths are fixed per kind
so every source matrix has a stable column count.
"""

from __future__ import annotations

import numpy as np
import scipy.fft
from scipy.stats import norm

from .attributions import segment_bounds
from .errors import InvalidParamsError
from .validation import check_matrix

TRANSFORM_NAMES = ("fft_mag", "dct", "sax", "deriv1", "deriv2")


def fft_magnitude(series) -> np.ndarray:
    """Spectrum magnitudes: first floor(T/2)+1 bins at padded resolution.

    The series is zero-padded to the next power of two so the transform runs
    on a radix-2 length; the padded spectrum is truncated to keep feature
    length a function of T alone.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise InvalidParamsError("series must be 1-D with T >= 2")
    T = x.size
    padded = 1 << (T - 1).bit_length()
    spectrum = np.fft.rfft(x, n=padded)
    return np.abs(spectrum)[: T // 2 + 1].astype(np.float32)


def dct2(series) -> np.ndarray:
    """Orthonormal DCT-II; preserves the L2 norm."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise InvalidParamsError("series must be a nonempty vector")
    return scipy.fft.dct(x, type=2, norm="ortho").astype(np.float32)


def sax(series, word_count: int = 20, alphabet: int = 4) -> np.ndarray:
    """Symbolic approximation: z-norm, PAA frames, normal-quantile symbols.

    A frame mean equal to a breakpoint maps to the higher symbol; a constant
    series normalizes to zeros and lands in the bin containing zero.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidParamsError("series must be 1-D")
    if not 1 <= word_count <= x.size:
        raise InvalidParamsError(f"word_count must be in [1, {x.size}]")
    if not 2 <= alphabet <= 10:
        raise InvalidParamsError("alphabet must be in [2, 10]")

    std = x.std()
    z = (x - x.mean()) / std if std > 1e-12 else np.zeros_like(x)
    frames = np.array([z[a:b].mean() for a, b in segment_bounds(x.size, word_count)])
    breakpoints = norm.ppf(np.arange(1, alphabet) / alphabet)
    return np.searchsorted(breakpoints, frames, side="right").astype(np.int64)


def derivative(series, order: int = 1) -> np.ndarray:
    """Forward differences, last value repeated to keep length T."""
    if order not in (1, 2):
        raise InvalidParamsError("order must be 1 or 2")
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise InvalidParamsError("series must be 1-D with T >= 2")
    for _ in range(order):
        d = np.diff(x)
        x = np.append(d, d[-1])
    return x.astype(np.float32)


def transform_block(samples: np.ndarray, kind: str, **params) -> np.ndarray:
    """Apply one transform row-wise; returns an (N, F) float64 matrix."""
    samples = check_matrix(samples, min_rows=1, min_cols=2)
    if kind == "fft_mag":
        rows = [fft_magnitude(r) for r in samples]
    elif kind == "dct":
        rows = [dct2(r) for r in samples]
    elif kind == "sax":
        rows = [sax(r, **params) for r in samples]
    elif kind == "deriv1":
        rows = [derivative(r, 1) for r in samples]
    elif kind == "deriv2":
        rows = [derivative(r, 2) for r in samples]
    else:
        raise InvalidParamsError(f"unknown transform {kind!r}")
    return np.asarray(rows, dtype=np.float64)
