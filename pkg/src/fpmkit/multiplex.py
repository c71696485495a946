"""Non-negative LED multiplexing weight matrices and their JSON exchange format.

The weight file is the boundary between this toolkit and the learning
harness that optimizes illumination patterns:

    {"m": <rows>, "k": <cols>, "weights": [<m*k floats, row-major>]}

All weights must be finite and >= 0.
"""

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MultiplexMatrix:
    """M x K illumination intensities; row k is one multiplexed LED pattern."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-D (m, k), got shape {w.shape}")
        m, k = w.shape
        if not (1 <= m <= k):
            raise ValueError(f"need 1 <= m <= k, got m={m}, k={k}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights contain non-finite values")
        if w.min() < 0:
            raise ValueError("weights must be non-negative")
        object.__setattr__(self, "weights", w)

    @property
    def m(self):
        return self.weights.shape[0]

    @property
    def k(self):
        return self.weights.shape[1]


def identity_multiplex(k):
    """K x K identity: multiplexing that reproduces the single-LED stack."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return MultiplexMatrix(np.eye(k))


def group_multiplex(k, m, seed=0):
    """Random m x k starting point with entries uniform on [0, 1)."""
    if not (1 <= m <= k):
        raise ValueError(f"need 1 <= m <= k, got m={m}, k={k}")
    return MultiplexMatrix(np.random.default_rng(seed).random((m, k)))


def max_normalize(matrix):
    """Scale the whole matrix so its largest weight is 1 (no-op if all zero)."""
    peak = matrix.weights.max()
    if peak == 0:
        return matrix
    return MultiplexMatrix(matrix.weights / peak)


def save_weights(matrix, path):
    doc = {"m": matrix.m, "k": matrix.k, "weights": matrix.weights.ravel().tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_weights(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not {"m", "k", "weights"} <= set(doc):
        raise ValueError(f"{path}: expected an object with keys m, k, weights")
    m, k, values = doc["m"], doc["k"], doc["weights"]
    if not isinstance(m, int) or not isinstance(k, int):
        raise ValueError(f"{path}: m and k must be integers")
    if not isinstance(values, list) or len(values) != m * k:
        raise ValueError(
            f"{path}: expected {m * k} weights for dims {m}x{k}, got {len(values) if isinstance(values, list) else type(values).__name__}")
    weights = np.asarray(values, dtype=np.float64).reshape(m, k)
    return MultiplexMatrix(weights)
