"""Image quality metrics."""

import math

import numpy as np

from .validation import check_same_shape


def mse(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape(a, b, "images")
    return float(np.mean((a - b) ** 2))


def psnr(a, b, peak=1.0):
    """10*log10(peak^2 / MSE) in dB; identical images report +inf."""
    if peak <= 0:
        raise ValueError(f"peak must be > 0, got {peak}")
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)
