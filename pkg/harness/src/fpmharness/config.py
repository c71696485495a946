"""Experiment configuration for classifier training runs.

A run is described by the imaging setting plus the usual optimizer knobs:

- CC: center (on-axis) pupil measurement only, 1 channel per color plane.
- SC: every channel of the measurement stack.
- R: reconstructed images (single-channel containers from the solver).
- UB: original images (ground-truth containers); the upper bound.
- MUX: single-LED stacks fed through a learned non-negative combination
  down to ``mux_m`` channels before the backbone.
"""

import math
from dataclasses import dataclass

from .errors import ConfigError

SETTINGS = ("CC", "SC", "R", "UB", "MUX")


@dataclass
class TrainConfig:
    setting: str
    train_path: str
    test_path: str
    dataset: str = "custom"
    mux_m: int = 0
    num_classes: int = 10
    lr: float = 1e-3
    epochs: int = 20
    batch_size: int = 128
    seed: int = 0
    pretrained: bool = False
    report_path: str | None = None
    weights_path: str | None = None

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ConfigError(
                f"unknown setting {self.setting!r}; expected one of {SETTINGS}")
        for name in ("train_path", "test_path"):
            if not getattr(self, name):
                raise ConfigError(f"{name} is required")
        if self.setting == "MUX":
            if not isinstance(self.mux_m, int) or self.mux_m < 1:
                raise ConfigError("MUX needs mux_m >= 1 output channels")
        elif self.mux_m:
            raise ConfigError(f"mux_m only applies to the MUX setting, "
                              f"not {self.setting}")
        if self.weights_path is not None and self.setting != "MUX":
            raise ConfigError("only MUX runs export multiplex weights")
        if not isinstance(self.num_classes, int) or self.num_classes < 2:
            raise ConfigError(f"num_classes must be >= 2, got {self.num_classes!r}")
        if not (isinstance(self.lr, (int, float)) and math.isfinite(self.lr)
                and self.lr > 0):
            raise ConfigError(f"lr must be finite and positive, got {self.lr!r}")
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ConfigError(f"epochs must be a positive integer, got {self.epochs!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(
                f"batch_size must be a positive integer, got {self.batch_size!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
