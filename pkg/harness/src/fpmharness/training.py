"""Training loops for the imaging-setting comparison.

One entry point, ``train(config)``, covers CC/SC/R/UB; ``train_multiplexed``
is the MUX-only wrapper that also exports the learned combination. The
reported accuracy is the final-epoch test accuracy in percent.

Runs are seeded (python, numpy, torch) and single-process, so repeats on
one machine reproduce; bitwise identity across torch builds or hardware
is not guaranteed by the framework.
"""

import json
import logging
import random
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, TensorDataset

from .config import TrainConfig
from .container import read_stack
from .data import prepare_pair
from .errors import ConfigError
from .models import MuxClassifier, build_backbone
from .weights_io import save_weights

logger = logging.getLogger("fpmharness")

REPORT_KEYS = ("setting", "dataset", "radius", "m", "accuracy", "epochs", "seed")


@dataclass
class TrainResult:
    accuracy: float  # final-epoch test accuracy, percent
    history: list  # per-epoch test accuracy
    report: dict
    beta: np.ndarray | None = field(default=None, repr=False)


def clamp_front(model):
    """Projection step keeping the learned LED combination non-negative."""
    model.front.clamp_()


def _seed_everything(seed):
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def _loader(x, y, batch_size, shuffle, generator=None):
    dataset = TensorDataset(torch.from_numpy(x), torch.from_numpy(y))
    return DataLoader(dataset, batch_size=batch_size, shuffle=shuffle,
                      num_workers=0, generator=generator)


def _accuracy(model, loader, device):
    model.eval()
    hits = total = 0
    with torch.no_grad():
        for images, labels in loader:
            logits = model(images.to(device))
            hits += int((logits.argmax(dim=1).cpu() == labels).sum())
            total += len(labels)
    return 100.0 * hits / total


def _build_model(config, in_channels, stack):
    if config.setting == "MUX":
        return MuxClassifier(stack.num_leds, config.mux_m,
                             color_channels=stack.color_channels,
                             num_classes=config.num_classes,
                             pretrained=config.pretrained)
    return build_backbone(in_channels, config.num_classes, config.pretrained)


def train(config: TrainConfig) -> TrainResult:
    """Train one classifier per the config and report final test accuracy."""
    train_stack = read_stack(config.train_path)
    test_stack = read_stack(config.test_path)
    (x_train, y_train), (x_test, y_test) = prepare_pair(
        train_stack, test_stack, config, config.train_path, config.test_path)

    _seed_everything(config.seed)
    device = torch.device("cuda" if torch.cuda.is_available() else "cpu")
    model = _build_model(config, x_train.shape[1], train_stack).to(device)
    shuffler = torch.Generator().manual_seed(config.seed)
    train_loader = _loader(x_train, y_train, config.batch_size, True, shuffler)
    test_loader = _loader(x_test, y_test, config.batch_size, False)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    criterion = nn.CrossEntropyLoss()
    is_mux = config.setting == "MUX"

    history = []
    for epoch in range(config.epochs):
        model.train()
        epoch_loss = 0.0
        for images, labels in train_loader:
            optimizer.zero_grad()
            loss = criterion(model(images.to(device)), labels.to(device))
            loss.backward()
            optimizer.step()
            if is_mux:
                clamp_front(model)
            epoch_loss += float(loss.detach()) * len(labels)
        history.append(_accuracy(model, test_loader, device))
        logger.info("epoch %d/%d loss %.4f test acc %.2f%%", epoch + 1,
                    config.epochs, epoch_loss / len(x_train), history[-1])

    beta = model.front.beta if is_mux else None
    report = {
        "setting": config.setting,
        "dataset": config.dataset,
        "radius": train_stack.radius,
        "m": config.mux_m if is_mux else None,
        "accuracy": round(history[-1], 4),
        "epochs": config.epochs,
        "seed": config.seed,
    }
    if config.report_path:
        with open(config.report_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True)
            fh.write("\n")
    if config.weights_path and beta is not None:
        save_weights(beta, config.weights_path)
    return TrainResult(accuracy=history[-1], history=history, report=report,
                       beta=beta)


def train_multiplexed(config: TrainConfig) -> TrainResult:
    """MUX-only entry point: learn the combination and export it."""
    if config.setting != "MUX":
        raise ConfigError(
            f"train_multiplexed needs the MUX setting, got {config.setting!r}")
    return train(config)
