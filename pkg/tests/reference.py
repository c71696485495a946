"""Independent oracles used to freeze expected values.

Everything here is computed from definitions (explicit DFT sums, double
loops, enumeration) and never calls into the package's FFT-based paths.
"""

import numpy as np


def dft_basis(n, centered_freqs, sign):
    """Matrix E[p, x] = exp(sign*2i*pi*p*x/n)/sqrt(n) for centered integer p."""
    x = np.arange(n)
    return np.exp(sign * 2j * np.pi * np.outer(centered_freqs, x) / n) / np.sqrt(n)


def centered_freqs(n):
    return np.arange(n) - n // 2


def dft2_centered(u):
    """Unitary centered 2-D DFT straight from the definition."""
    h, w = u.shape
    ey = dft_basis(h, centered_freqs(h), -1)
    ex = dft_basis(w, centered_freqs(w), -1)
    return ey @ u @ ex.T


def idft2_centered(spectrum):
    h, w = spectrum.shape
    ey = dft_basis(h, centered_freqs(h), +1)
    ex = dft_basis(w, centered_freqs(w), +1)
    return ey.T @ spectrum @ ex  # conjugate-transposed basis applied from both sides


def disk_support(shape, center, radius):
    """Enumerate every bin within `radius` of `center` on the centered grid."""
    h, w = shape
    support = np.zeros(shape)
    for i, fy in enumerate(centered_freqs(h)):
        for j, fx in enumerate(centered_freqs(w)):
            if (fy - center[0]) ** 2 + (fx - center[1]) ** 2 <= radius ** 2:
                support[i, j] = 1.0
    return support


def forward_single_oracle(u, center, radius):
    """|inverse-DFT of disk-cropped spectrum| from definitional sums."""
    spectrum = dft2_centered(np.asarray(u, dtype=complex))
    cropped = disk_support(u.shape, center, radius) * spectrum
    return np.abs(idft2_centered(cropped))


def tv_oracle(u, eps=0.0):
    """Double-loop smoothed anisotropic TV with Neumann boundaries."""
    h, w = u.shape
    total = 0.0
    for i in range(h):
        for j in range(w):
            dx = u[i, j + 1] - u[i, j] if j + 1 < w else 0.0
            dy = u[i + 1, j] - u[i, j] if i + 1 < h else 0.0
            total += np.sqrt(dx * dx + eps * eps) + np.sqrt(dy * dy + eps * eps)
    return total


def bilinear_oracle(image, out_h, out_w):
    """Per-pixel separable bilinear resize with half-pixel centers."""
    image = np.asarray(image, dtype=np.float64)
    in_h, in_w = image.shape[:2]
    out = np.zeros((out_h, out_w) + image.shape[2:])
    for i in range(out_h):
        sy = min(max((i + 0.5) * in_h / out_h - 0.5, 0.0), in_h - 1.0)
        y0 = int(np.floor(sy))
        y1 = min(y0 + 1, in_h - 1)
        fy = sy - y0
        for j in range(out_w):
            sx = min(max((j + 0.5) * in_w / out_w - 0.5, 0.0), in_w - 1.0)
            x0 = int(np.floor(sx))
            x1 = min(x0 + 1, in_w - 1)
            fx = sx - x0
            top = image[y0, x0] * (1 - fx) + image[y0, x1] * fx
            bot = image[y1, x0] * (1 - fx) + image[y1, x1] * fx
            out[i, j] = top * (1 - fy) + bot * fy
    return out


def central_difference_gradient(fn, u, h=1e-5):
    """Gradient of a scalar function of an image by central differences."""
    grad = np.zeros_like(u, dtype=np.float64)
    for idx in np.ndindex(u.shape):
        up = u.copy()
        um = u.copy()
        up[idx] += h
        um[idx] -= h
        grad[idx] = (fn(up) - fn(um)) / (2 * h)
    return grad
