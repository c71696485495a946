"""Input validation helpers used at API boundaries."""

import numpy as np


def as_complex_field(x, name="field"):
    """Coerce to a finite 2-D complex128 array (the high-resolution object u)."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"{name}: expected a 2-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x.real)) or not np.all(np.isfinite(np.imag(x))):
        raise ValueError(f"{name}: contains non-finite values")
    return np.ascontiguousarray(x, dtype=np.complex128)


def as_real_image(x, name="image"):
    """Coerce to a finite, non-negative 2-D float64 array."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"{name}: expected a 2-D array, got shape {x.shape}")
    if np.iscomplexobj(x):
        raise ValueError(f"{name}: expected real values, got complex")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name}: contains non-finite values")
    if np.any(x < 0):
        raise ValueError(f"{name}: contains negative values")
    return x


def check_same_shape(a, b, what="arrays"):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {what} have shapes {a.shape} and {b.shape}")


def as_image_batch(x, name="X"):
    """Coerce to (n, H, W); a single (H, W) image becomes a batch of one."""
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise ValueError(f"{name}: expected (n, H, W) or (H, W), got shape {x.shape}")
    if not np.all(np.isfinite(x.real)) or not np.all(np.isfinite(np.imag(x))):
        raise ValueError(f"{name}: contains non-finite values")
    return x


def as_stack_batch(x, name="X"):
    """Coerce to (n, K, H, W); a single (K, H, W) stack becomes a batch of one."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    if x.ndim != 4:
        raise ValueError(f"{name}: expected (n, K, H, W) or (K, H, W), got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name}: contains non-finite values")
    return x
