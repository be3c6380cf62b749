"""Layer specifications and static shape inference for the 1-D CNN stack.

Activations flow in two forms: channelized ``("ch", channels, length)`` for
the convolutional stage and ``("flat", features)`` after Flatten. Convolutions
and pooling use valid (no) padding; pooling strides by its window size.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidParamsError, ShapeMismatchError

Shape = tuple  # ("ch", C, L) or ("flat", F)


@dataclass(frozen=True)
class Conv1D:
    in_ch: int
    out_ch: int
    kernel: int
    stride: int = 1

    def __post_init__(self):
        if self.kernel < 1 or self.stride < 1 or self.in_ch < 1 or self.out_ch < 1:
            raise InvalidParamsError(f"bad conv1d spec: {self}")


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class MaxPool1D:
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise InvalidParamsError(f"bad maxpool1d spec: {self}")


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dense:
    in_features: int
    out_features: int

    def __post_init__(self):
        if self.in_features < 1 or self.out_features < 1:
            raise InvalidParamsError(f"bad dense spec: {self}")


@dataclass(frozen=True)
class Dropout:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise InvalidParamsError(f"dropout p must be in [0, 1), got {self.p}")


LayerSpec = Conv1D | ReLU | MaxPool1D | Flatten | Dense | Dropout


def output_shape(layer: LayerSpec, shape: Shape) -> Shape:
    """Shape produced by ``layer`` on input ``shape``; raises on mismatch."""
    if isinstance(layer, Conv1D):
        if shape[0] != "ch" or shape[1] != layer.in_ch:
            raise ShapeMismatchError(f"conv1d expects ({layer.in_ch}, L) input, got {shape}")
        length = shape[2]
        if length < layer.kernel:
            raise ShapeMismatchError(f"conv1d kernel {layer.kernel} exceeds length {length}")
        out_len = (length - layer.kernel) // layer.stride + 1
        return ("ch", layer.out_ch, out_len)
    if isinstance(layer, MaxPool1D):
        if shape[0] != "ch":
            raise ShapeMismatchError(f"maxpool1d expects channel input, got {shape}")
        if shape[2] < layer.size:
            raise ShapeMismatchError(f"maxpool1d size {layer.size} exceeds length {shape[2]}")
        return ("ch", shape[1], shape[2] // layer.size)
    if isinstance(layer, Flatten):
        if shape[0] != "ch":
            raise ShapeMismatchError(f"flatten expects channel input, got {shape}")
        return ("flat", shape[1] * shape[2])
    if isinstance(layer, Dense):
        # Channelized input is implicitly flattened (row-major) when it fits.
        if shape[0] == "flat":
            width = shape[1]
        else:
            width = shape[1] * shape[2]
        if width != layer.in_features:
            raise ShapeMismatchError(
                f"dense expects {layer.in_features} input features, got {shape}"
            )
        return ("flat", layer.out_features)
    if isinstance(layer, (ReLU, Dropout)):
        return shape
    raise ShapeMismatchError(f"unknown layer {layer!r}")
