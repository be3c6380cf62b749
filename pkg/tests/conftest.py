import numpy as np
import pytest

from tsxplain.data import TimeSeriesDataset, serialize_ucr
from tsxplain.nn import Conv1D, Dense, Dropout, Flatten, MaxPool1D, Model, ReLU


def make_linear_model(weights, bias=None):
    """Model whose logits are exactly W x + b (Flatten + one Dense)."""
    weights = np.asarray(weights, dtype=np.float32)  # (class_count, T)
    k, t = weights.shape
    model = Model([Flatten(), Dense(t, k)], input_length=t, class_count=k)
    model.params[1] = {
        "W": weights.copy(),
        "b": np.zeros(k, dtype=np.float32) if bias is None else np.asarray(bias, dtype=np.float32),
    }
    return model


def make_selector_model(length: int, index: int):
    """Binary model that looks only at one time step: logits (x_i, -x_i)."""
    W = np.zeros((2, length), dtype=np.float32)
    W[0, index] = 1.0
    W[1, index] = -1.0
    return make_linear_model(W)


def make_conv_model(seed: int, length: int = 32, dropout: float = 0.0) -> Model:
    """Small seeded conv net with shape variety driven by the seed."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    kernel = int(rng.integers(2, 4))
    pool = int(rng.integers(2, 4))
    c1 = int(rng.integers(2, 5))
    layers = [Conv1D(1, c1, kernel), ReLU(), MaxPool1D(pool)]
    reduced = (length - kernel + 1) // pool
    if rng.random() < 0.5 and reduced >= kernel + 1:
        c2 = int(rng.integers(2, 4))
        layers += [Conv1D(c1, c2, kernel), ReLU()]
        flat = c2 * (reduced - kernel + 1)
    else:
        c2 = c1
        flat = c1 * reduced
    layers += [Flatten(), Dense(flat, 8), ReLU()]
    if dropout > 0:
        layers.append(Dropout(dropout))
    layers.append(Dense(8, k))
    return Model.initialized(layers, length, k, seed=seed)


def make_sine_bump(n: int, length: int, seed: int = 0, bump: float = 2.0,
                   train_fraction: float = 0.5) -> TimeSeriesDataset:
    """Sine waves, half of them with a step bump: an easily separable pair."""
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    X = np.sin(2 * np.pi * t / max(16, length // 4))[None, :]
    X = X * rng.uniform(0.8, 1.2, (n, 1)) + rng.normal(0, 0.05, (n, length))
    y = rng.integers(0, 2, n)
    # wide enough for a pooled conv stack to see it from a tiny train split
    width = max(4, length // 8)
    for i in range(n):
        if y[i] == 1:
            c = int(rng.integers(width, length - width))
            X[i, c - width // 2 : c + width // 2] += bump
    n_train = int(n * train_fraction)
    split = np.array(["train"] * n_train + ["test"] * (n - n_train))
    return TimeSeriesDataset(
        X.astype(np.float32), y.astype(np.int64), split, 2, (0.0, 1.0)
    )


def write_dataset_pair(dataset: TimeSeriesDataset, directory) -> tuple:
    paths = []
    for part in ("train", "test"):
        sub = dataset.subset(dataset.indices(part))
        path = str(directory / f"{part}.tsv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(serialize_ucr(sub))
        paths.append(path)
    return tuple(paths)


def finite_diff_input_grad(model: Model, x: np.ndarray, target: int,
                           h: float = 1e-5) -> np.ndarray:
    """Central differences of one logit wrt the input, float64 probe."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(x.size):
        up, dn = x.copy(), x.copy()
        up[i] += h
        dn[i] -= h
        fu = model.logits(up[None, :])[0, target]
        fd = model.logits(dn[None, :])[0, target]
        grad[i] = (fu - fd) / (2 * h)
    return grad


@pytest.fixture(scope="session")
def tiny_dataset():
    return make_sine_bump(40, 64, seed=5)


@pytest.fixture(scope="session")
def tiny_files(tiny_dataset, tmp_path_factory):
    return write_dataset_pair(tiny_dataset, tmp_path_factory.mktemp("tinydata"))
