"""Centered, unitary 2-D Fourier transforms.

Conventions used throughout the package:

* both directions are unitary (scale 1/sqrt(H*W) each way), so Parseval
  holds exactly and masking by a 0/1 support is non-expansive;
* spectra are reported in centered layout, DC at bin (H//2, W//2), i.e.
  the bin at shifted index i along an axis of length n carries the integer
  frequency i - n//2.
"""

import numpy as np


def fft2(field):
    """Unitary 2-D DFT of a spatial field, returned in centered layout."""
    field = np.asarray(field)
    if not np.all(np.isfinite(field.real)) or not np.all(np.isfinite(np.imag(field))):
        raise ValueError("fft2: input contains non-finite values")
    return np.fft.fftshift(np.fft.fft2(field, norm="ortho"))


def ifft2(spectrum):
    """Inverse of :func:`fft2`: centered spectrum in, spatial field out."""
    spectrum = np.asarray(spectrum)
    if not np.all(np.isfinite(spectrum.real)) or not np.all(np.isfinite(np.imag(spectrum))):
        raise ValueError("ifft2: input contains non-finite values")
    return np.fft.ifft2(np.fft.ifftshift(spectrum), norm="ortho")


def freq_coords(n):
    """Integer frequency coordinate of each bin along one centered axis."""
    return np.arange(n) - n // 2
