"""Classifier harness for Fourier ptychography measurement containers."""

from .config import SETTINGS, TrainConfig
from .container import StackFile, read_stack
from .data import select_channels, validate_labels
from .errors import ConfigError, ContainerFormatError, HarnessError
from .models import MuxClassifier, MuxFrontEnd, build_backbone
from .training import TrainResult, train, train_multiplexed
from .weights_io import load_weights, save_weights, validate_doc, weights_doc

__version__ = "0.1.0"

__all__ = [
    "SETTINGS", "TrainConfig", "StackFile", "read_stack",
    "select_channels", "validate_labels",
    "ConfigError", "ContainerFormatError", "HarnessError",
    "MuxClassifier", "MuxFrontEnd", "build_backbone",
    "TrainResult", "train", "train_multiplexed",
    "load_weights", "save_weights", "validate_doc", "weights_doc",
    "__version__",
]
