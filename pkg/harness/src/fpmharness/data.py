"""Channel contracts: which container channels each setting consumes.

Single-LED stacks order their channels plane-major: for color containers
with L LEDs the layout is [R LEDs 0..L-1, G LEDs 0..L-1, B LEDs 0..L-1],
so the on-axis measurement of plane p sits at channel p*L + L//2.
"""

import numpy as np

from .config import TrainConfig
from .container import StackFile
from .errors import ConfigError


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def select_channels(stack: StackFile, setting: str, mux_m: int = 0):
    """Return the (n, c, h, w) float32 input array the setting trains on.

    Raises ConfigError when the container does not satisfy the setting's
    channel contract, before any training starts.
    """
    k = stack.num_channels
    color = stack.color_channels
    if setting == "CC":
        _require(not stack.is_ground_truth,
                 "ground-truth containers are consumed by the UB setting, not CC")
        _require(stack.multiplex is None,
                 "CC consumes single-LED stacks, not multiplexed ones")
        if stack.grid is None:
            _require(k == color,
                     f"gridless container has K={k}, expected {color} "
                     f"(one channel per color plane)")
            return np.ascontiguousarray(stack.payload)
        leds = stack.num_leds
        picks = [p * leds + leds // 2 for p in range(color)]
        return np.ascontiguousarray(stack.payload[:, picks])
    if setting == "SC":
        _require(not stack.is_ground_truth,
                 "ground-truth containers are consumed by the UB setting, not SC")
        return np.ascontiguousarray(stack.payload)
    if setting == "R":
        _require(not stack.is_ground_truth,
                 "ground-truth containers are consumed by the UB setting, not R")
        _require(stack.grid is None and k == color,
                 f"R consumes reconstructed images (K={color} per record, "
                 f"no grid); got K={k}")
        return np.ascontiguousarray(stack.payload)
    if setting == "UB":
        _require(stack.is_ground_truth,
                 "UB consumes ground-truth containers (flag bit 1)")
        return np.ascontiguousarray(stack.payload)
    if setting == "MUX":
        _require(not stack.is_ground_truth,
                 "MUX consumes single-LED stacks, not ground truth")
        _require(stack.multiplex is None,
                 "container is already multiplexed; MUX learns the combination "
                 "from single-LED stacks")
        _require(stack.grid is not None, "MUX needs LED-grid metadata")
        leds = stack.num_leds
        _require(1 <= mux_m <= leds,
                 f"mux_m={mux_m} out of range for a {leds}-LED grid")
        return np.ascontiguousarray(stack.payload)
    raise ConfigError(f"unknown setting {setting!r}")


def validate_labels(stack: StackFile, num_classes: int, path: str):
    """Labels must be integers in [0, num_classes) for every record."""
    labels = stack.labels
    for i, label in enumerate(labels):
        if not isinstance(label, int) or isinstance(label, bool):
            raise ConfigError(f"{path}: record {i} has non-integer label {label!r}")
        if not 0 <= label < num_classes:
            raise ConfigError(
                f"{path}: record {i} label {label} outside [0, {num_classes})")
    return np.asarray(labels, dtype=np.int64)


def prepare_pair(train: StackFile, test: StackFile, config: TrainConfig,
                 train_path: str, test_path: str):
    """Apply the channel contract to both splits and check they agree."""
    x_train = select_channels(train, config.setting, config.mux_m)
    x_test = select_channels(test, config.setting, config.mux_m)
    if x_train.shape[1:] != x_test.shape[1:]:
        raise ConfigError(
            f"train records are {x_train.shape[1:]} but test records are "
            f"{x_test.shape[1:]}")
    y_train = validate_labels(train, config.num_classes, train_path)
    y_test = validate_labels(test, config.num_classes, test_path)
    return (x_train, y_train), (x_test, y_test)
