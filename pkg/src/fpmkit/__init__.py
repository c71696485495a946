"""FPM measurement simulation, LED multiplexing, and TV-regularized reconstruction."""

from .container import StackContainer, read_stack, write_stack
from .datasets import DatasetRecord, bilinear_resize, load_image_dir, parse_idx, shuffle_split
from .errors import ConfigError, ContainerFormatError, FpmError, NumericalError
from .estimators import FpmSimulator, TvReconstructor
from .forward import (NO_NOISE, MeasurementStack, NoiseSpec, band_limited_field,
                      forward_multiplexed, forward_single, forward_stack)
from .fourier import fft2, freq_coords, ifft2
from .geometry import LedGrid, PupilMask, circular_support, coverage, grid_masks, make_pupil_mask
from .metrics import mse, psnr
from .multiplex import (MultiplexMatrix, group_multiplex, identity_multiplex, load_weights,
                        max_normalize, save_weights)
from .recon import (ReconResult, ReconSettings, data_energy, energy_gradient, reconstruct,
                    total_energy, tv, tv_gradient)

__version__ = "0.1.0"

__all__ = [
    "StackContainer", "read_stack", "write_stack",
    "DatasetRecord", "bilinear_resize", "load_image_dir", "parse_idx", "shuffle_split",
    "ConfigError", "ContainerFormatError", "FpmError", "NumericalError",
    "FpmSimulator", "TvReconstructor",
    "NO_NOISE", "MeasurementStack", "NoiseSpec", "band_limited_field",
    "forward_multiplexed", "forward_single", "forward_stack",
    "fft2", "freq_coords", "ifft2",
    "LedGrid", "PupilMask", "circular_support", "coverage", "grid_masks", "make_pupil_mask",
    "mse", "psnr",
    "MultiplexMatrix", "group_multiplex", "identity_multiplex", "load_weights",
    "max_normalize", "save_weights",
    "ReconResult", "ReconSettings", "data_energy", "energy_gradient", "reconstruct",
    "total_energy", "tv", "tv_gradient",
]
