"""Quantum convolutional network toolkit: simulator, models, training, data."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError
from .model import Architecture, build_architecture, feature_count, forward, parameter_count
from .training import LabeledDataset, TrainConfig, train_model

__all__ = [
    "Architecture",
    "ConfigError",
    "DataError",
    "LabeledDataset",
    "TrainConfig",
    "build_architecture",
    "feature_count",
    "forward",
    "parameter_count",
    "train_model",
    "__version__",
]
