"""LED-grid geometry and circular pupil masks in centered frequency coordinates."""

from dataclasses import dataclass, field

import numpy as np

from .fourier import freq_coords


@dataclass(frozen=True)
class LedGrid:
    """Square grid of LED positions mapped to pupil centers in frequency space.

    grid_side must be odd so one LED sits exactly on-axis (the CC channel).
    spacing is the distance in frequency pixels between adjacent pupil
    centers; it defaults to the pupil radius, which makes adjacent pupils
    overlap as FPM coverage requires.
    """

    grid_side: int = 5
    spacing: float | None = None
    radius: float = 5.0

    def __post_init__(self):
        if self.grid_side < 1 or self.grid_side % 2 == 0:
            raise ValueError(f"grid_side must be odd and >= 1, got {self.grid_side}")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.spacing is None:
            object.__setattr__(self, "spacing", float(self.radius))
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")

    @property
    def num_leds(self):
        return self.grid_side * self.grid_side

    @property
    def cc_channel(self):
        """Row-major channel index of the on-axis LED."""
        return self.num_leds // 2

    def indices(self):
        """All (row, col) LED indices in row-major order."""
        return [(r, c) for r in range(self.grid_side) for c in range(self.grid_side)]

    def center(self, row, col):
        """Pupil center (cy, cx) in centered frequency pixels for one LED."""
        if not (0 <= row < self.grid_side and 0 <= col < self.grid_side):
            raise ValueError(f"LED index {(row, col)} outside {self.grid_side}x{self.grid_side} grid")
        half = (self.grid_side - 1) / 2
        return ((row - half) * self.spacing, (col - half) * self.spacing)


@dataclass(frozen=True)
class PupilMask:
    """Binary circular crop of the centered spectrum.

    support[i, j] is 1 iff the bin's centered frequency coordinate lies
    within `radius` of `center`. Bins outside the Nyquist grid simply do
    not exist, so a circle reaching past the grid edge is clipped, never
    wrapped.
    """

    center: tuple[float, float]
    radius: float
    support: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.support.shape

    def popcount(self):
        return int(self.support.sum())


def circular_support(shape, center, radius):
    """Binary H×W disk on the centered frequency grid."""
    h, w = shape
    fy = freq_coords(h)[:, None].astype(np.float64)
    fx = freq_coords(w)[None, :].astype(np.float64)
    dist2 = (fy - center[0]) ** 2 + (fx - center[1]) ** 2
    return (dist2 <= radius * radius).astype(np.float64)


def make_pupil_mask(grid, index, shape):
    """Pupil mask for one LED of `grid` on a field of the given (H, W)."""
    row, col = index
    center = grid.center(row, col)
    return PupilMask(center=center, radius=float(grid.radius),
                     support=circular_support(shape, center, grid.radius))


def grid_masks(grid, shape):
    """All K pupil masks of `grid` in row-major LED order."""
    return [make_pupil_mask(grid, idx, shape) for idx in grid.indices()]


def coverage(grid, shape):
    """Fraction of frequency bins covered by at least one pupil of `grid`."""
    total = np.zeros(shape)
    for mask in grid_masks(grid, shape):
        total += mask.support
    return float(np.count_nonzero(total)) / total.size
