"""Convolutional classifier: stack builder plus an sklearn-style estimator."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import InvalidParamsError, ShapeMismatchError
from .layers import Conv1D, Dense, Dropout, Flatten, MaxPool1D, ReLU
from .model import Model, softmax
from .training import TrainConfig, train_arrays


def build_cnn(
    input_length: int,
    class_count: int,
    filters=(3, 6, 9),
    kernel: int = 3,
    pool: int = 5,
    dense_units: int = 50,
    dropout: float = 0.5,
    seed: int = 0,
) -> Model:
    """Conv/ReLU/MaxPool blocks, then Flatten, Dense+ReLU+Dropout, Dense logits.

    Pooling is skipped for a block whose feature map is already shorter than
    the pool window, so deep stacks stay valid on short inputs.
    """
    if not filters:
        raise InvalidParamsError("need at least one conv block")
    layers = []
    in_ch, length = 1, int(input_length)
    for f in filters:
        layers.append(Conv1D(in_ch, int(f), kernel))
        length = length - kernel + 1
        if length < 1:
            raise ShapeMismatchError(f"input_length {input_length} too short for {len(filters)} conv blocks")
        layers.append(ReLU())
        if length >= pool:
            layers.append(MaxPool1D(pool))
            length //= pool
        in_ch = int(f)
    layers.append(Flatten())
    layers.append(Dense(in_ch * length, dense_units))
    layers.append(ReLU())
    if dropout > 0:
        layers.append(Dropout(dropout))
    layers.append(Dense(dense_units, class_count))
    return Model.initialized(layers, input_length, class_count, seed=seed)


class ConvNetClassifier(ClassifierMixin, BaseEstimator):
    """Small 1-D convnet with the fit/predict estimator contract.

    Wraps the layer stack from :func:`build_cnn` and the Adam trainer; all
    hyperparameters are constructor arguments so get_params/set_params and
    clone() behave as expected.
    """

    def __init__(
        self,
        filters=(3, 6, 9),
        kernel_size=3,
        pool_size=5,
        dense_units=50,
        dropout=0.5,
        epochs=100,
        batch_size=32,
        learning_rate=1e-3,
        beta1=0.9,
        beta2=0.999,
        epsilon=1e-8,
        seed=0,
    ):
        self.filters = filters
        self.kernel_size = kernel_size
        self.pool_size = pool_size
        self.dense_units = dense_units
        self.dropout = dropout
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ShapeMismatchError("X must be a nonempty (N, T) matrix")
        if y.shape != (X.shape[0],):
            raise ShapeMismatchError("y must align with X rows")
        if not np.all(np.isfinite(X)):
            raise InvalidParamsError("X contains non-finite values")

        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise InvalidParamsError("need at least two classes")
        self.n_features_in_ = X.shape[1]
        self.model_ = build_cnn(
            X.shape[1],
            self.classes_.size,
            filters=self.filters,
            kernel=self.kernel_size,
            pool=self.pool_size,
            dense_units=self.dense_units,
            dropout=self.dropout,
            seed=self.seed,
        )
        config = TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            seed=self.seed,
        )
        self.history_ = train_arrays(self.model_, X, y_idx, config)
        return self

    def _check_ready(self, X):
        if not hasattr(self, "model_"):
            raise InvalidParamsError("classifier is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ShapeMismatchError(f"X shape {X.shape} != (N, {self.n_features_in_})")
        return X

    def decision_function(self, X):
        return self.model_.logits(self._check_ready(X))

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
