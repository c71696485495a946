"""Multiplex weight files: {"m", "k", "weights"} JSON, row-major floats.

This is the same schema the simulator consumes for its --weights option,
so a trained combination can be replayed on the physical forward model.
Every weight must be finite and non-negative.
"""

import json
import math

import numpy as np

from .errors import ConfigError


def weights_doc(beta: np.ndarray) -> dict:
    beta = np.asarray(beta, dtype=np.float64)
    if beta.ndim != 2:
        raise ConfigError(f"weights must be a 2-D matrix, got shape {beta.shape}")
    if not np.isfinite(beta).all():
        raise ConfigError("weights contain non-finite values")
    if (beta < 0).any():
        raise ConfigError("weights must be non-negative")
    m, k = beta.shape
    return {"m": int(m), "k": int(k),
            "weights": [float(x) for x in beta.ravel(order="C")]}


def save_weights(beta: np.ndarray, path) -> dict:
    doc = weights_doc(beta)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    return doc


def load_weights(path) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    return validate_doc(doc, origin=str(path))


def validate_doc(doc, origin="weights") -> np.ndarray:
    if not isinstance(doc, dict):
        raise ConfigError(f"{origin}: weight document must be a JSON object")
    try:
        m, k = int(doc["m"]), int(doc["k"])
        weights = doc["weights"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{origin}: missing or malformed m/k/weights: {exc}") from exc
    if m < 1 or k < 1:
        raise ConfigError(f"{origin}: m and k must be >= 1, got m={m} k={k}")
    if not isinstance(weights, list) or len(weights) != m * k:
        raise ConfigError(
            f"{origin}: expected {m * k} weights, got "
            f"{len(weights) if isinstance(weights, list) else type(weights).__name__}")
    values = []
    for i, value in enumerate(weights):
        if not isinstance(value, (int, float)) or isinstance(value, bool) \
                or not math.isfinite(value) or value < 0:
            raise ConfigError(f"{origin}: weight {i} is {value!r}, needs a "
                              f"finite non-negative number")
        values.append(float(value))
    return np.asarray(values, dtype=np.float64).reshape(m, k)
