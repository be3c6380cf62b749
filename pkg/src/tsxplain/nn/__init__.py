from .classifier import ConvNetClassifier, build_cnn
from .introspection import activation_maximization, activation_vector, mc_dropout_predict
from .layers import Conv1D, Dense, Dropout, Flatten, LayerSpec, MaxPool1D, ReLU, output_shape
from .model import ForwardTrace, Model, glorot_uniform, softmax
from .training import TrainConfig, TrainHistory, train, train_arrays

__all__ = [
    "Conv1D",
    "ConvNetClassifier",
    "Dense",
    "Dropout",
    "Flatten",
    "ForwardTrace",
    "LayerSpec",
    "MaxPool1D",
    "Model",
    "ReLU",
    "TrainConfig",
    "TrainHistory",
    "activation_maximization",
    "activation_vector",
    "build_cnn",
    "glorot_uniform",
    "mc_dropout_predict",
    "output_shape",
    "softmax",
    "train",
    "train_arrays",
]
