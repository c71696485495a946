"""FPM forward measurement models.

A single-LED measurement is the modulus of the band-limited field obtained
by cropping the object spectrum with one pupil mask:

    f = |ifft2(mask * fft2(u))| (+ noise, clamped at 0)

A multiplexed measurement is a non-negative linear combination of the
single-LED measurements, with noise added once per combined channel.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .fourier import fft2, ifft2
from .geometry import LedGrid, grid_masks
from .validation import as_complex_field, check_same_shape

NOISE_KINDS = ("none", "gaussian")


@dataclass(frozen=True)
class NoiseSpec:
    """Additive measurement noise. kind='none' leaves values untouched bit-for-bit."""

    kind: str = "none"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected one of {NOISE_KINDS}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    def rng(self):
        return np.random.default_rng(self.seed)

    def derive(self, index):
        """Per-record spec with a seed derived from (seed, index).

        Each record in a batch draws from its own stream, so simulation
        output is identical no matter how records are scheduled over jobs.
        """
        child = np.random.SeedSequence(entropy=self.seed, spawn_key=(index,))
        return replace(self, seed=int(child.generate_state(1)[0]))

    def apply(self, image, rng):
        """Add noise to one measurement and clamp at zero."""
        if self.kind == "none":
            return image
        return np.maximum(image + rng.normal(0.0, self.sigma, image.shape), 0.0)


NO_NOISE = NoiseSpec()


@dataclass
class MeasurementStack:
    """K measurements of one object plus the acquisition metadata.

    For single-LED stacks, channel K//2 is the on-axis (CC) measurement and
    K equals grid.num_leds. Stacks produced by forward_multiplexed carry the
    output-channel count in multiplex_m instead.
    """

    measurements: np.ndarray  # (K, H, W) float64, >= 0
    grid: LedGrid | None = None
    noise: NoiseSpec = NO_NOISE
    source_id: str = ""
    multiplex_m: int | None = None
    label: int | None = field(default=None, compare=False)

    def __post_init__(self):
        m = np.asarray(self.measurements, dtype=np.float64)
        if m.ndim != 3:
            raise ValueError(f"measurements must be (K, H, W), got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("measurements contain non-finite values")
        if m.size and m.min() < 0:
            raise ValueError("measurements must be non-negative")
        if self.grid is not None and self.multiplex_m is None and m.shape[0] != self.grid.num_leds:
            raise ValueError(
                f"stack has {m.shape[0]} channels but grid has {self.grid.num_leds} LEDs")
        if self.multiplex_m is not None and m.shape[0] != self.multiplex_m:
            raise ValueError(
                f"stack has {m.shape[0]} channels but multiplex_m={self.multiplex_m}")
        self.measurements = m

    @property
    def num_channels(self):
        return self.measurements.shape[0]

    @property
    def image_shape(self):
        return self.measurements.shape[1:]

    @property
    def cc_index(self):
        return self.num_channels // 2

    @property
    def is_multiplexed(self):
        return self.multiplex_m is not None

    def cc_measurement(self):
        if self.is_multiplexed or self.num_channels == 0:
            raise ValueError("stack has no identifiable on-axis channel")
        return self.measurements[self.cc_index]


def band_limited_field(u, support):
    """Complex field after cropping the spectrum of u with a 0/1 support."""
    return ifft2(support * fft2(u))


def forward_single(u, mask, noise=NO_NOISE, rng=None):
    """One band-limited measurement of u through one pupil mask."""
    u = as_complex_field(u, "u")
    check_same_shape(u, mask.support, "field and mask")
    f = np.abs(band_limited_field(u, mask.support))
    if noise.kind == "none":
        return f
    return noise.apply(f, rng if rng is not None else noise.rng())


def forward_stack(u, grid, noise=NO_NOISE, source_id="", label=None):
    """All K = grid_side^2 single-LED measurements in row-major LED order."""
    u = as_complex_field(u, "u")
    spectrum = fft2(u)
    rng = noise.rng()
    out = np.empty((grid.num_leds, *u.shape), dtype=np.float64)
    for k, mask in enumerate(grid_masks(grid, u.shape)):
        f = np.abs(ifft2(mask.support * spectrum))
        out[k] = noise.apply(f, rng)
    return MeasurementStack(out, grid=grid, noise=noise, source_id=source_id, label=label)


def forward_multiplexed(u, grid, beta, noise=NO_NOISE, source_id="", label=None):
    """M multiplexed measurements, channel k = sum_l beta[k, l] * single_l.

    Singles are computed noiselessly; noise is drawn once per output channel.
    """
    u = as_complex_field(u, "u")
    if beta.k != grid.num_leds:
        raise ValueError(
            f"multiplex matrix has {beta.k} columns but grid has {grid.num_leds} LEDs")
    singles = forward_stack(u, grid).measurements
    combined = np.tensordot(beta.weights, singles, axes=1)
    rng = noise.rng()
    for k in range(combined.shape[0]):
        combined[k] = noise.apply(combined[k], rng)
    return MeasurementStack(combined, grid=grid, noise=noise, source_id=source_id,
                            multiplex_m=beta.m, label=label)
