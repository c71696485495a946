"""Scikit-learn style wrappers around the forward model and the reconstructor.

Both are stateless transformers (fit only validates and caches geometry), so
they compose with sklearn pipelines:

    Pipeline([("fpm", FpmSimulator(radius=5)), ("tv", TvReconstructor(alpha=0))])
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .forward import NO_NOISE, MeasurementStack, NoiseSpec, forward_multiplexed, forward_stack
from .geometry import LedGrid, grid_masks
from .recon import ReconSettings, reconstruct
from .validation import as_image_batch, as_stack_batch


class FpmSimulator(BaseEstimator, TransformerMixin):
    """Transforms (n, H, W) images into (n, K, H, W) FPM measurement stacks.

    With `weights` (a MultiplexMatrix) the output channels are the
    multiplexed combinations instead of the raw single-LED measurements.
    Noise seeds are derived per record, so results do not depend on batch
    order or splitting.
    """

    def __init__(self, grid_side=5, spacing=None, radius=5.0, noise="none",
                 sigma=0.0, seed=0, weights=None):
        self.grid_side = grid_side
        self.spacing = spacing
        self.radius = radius
        self.noise = noise
        self.sigma = sigma
        self.seed = seed
        self.weights = weights

    def _grid(self):
        return LedGrid(grid_side=self.grid_side, spacing=self.spacing, radius=self.radius)

    def _noise(self):
        return NoiseSpec(kind=self.noise, sigma=self.sigma, seed=self.seed)

    def fit(self, X, y=None):
        X = as_image_batch(X)
        self.grid_ = self._grid()
        self.noise_spec_ = self._noise()
        self.masks_ = grid_masks(self.grid_, X.shape[1:])
        self.n_channels_ = self.weights.m if self.weights is not None else self.grid_.num_leds
        return self

    def transform(self, X):
        X = as_image_batch(X)
        grid = self._grid()
        base_noise = self._noise()
        out = None
        for i, image in enumerate(X):
            stack = self.simulate_record(image, i, grid=grid, base_noise=base_noise)
            if out is None:
                out = np.empty((len(X), stack.num_channels, *stack.image_shape))
            out[i] = stack.measurements
        return out

    def simulate_record(self, image, index, grid=None, base_noise=None, source_id="", label=None):
        """One record's MeasurementStack with its per-record derived noise."""
        grid = grid or self._grid()
        noise = (base_noise or self._noise()).derive(index)
        if self.weights is not None:
            return forward_multiplexed(image, grid, self.weights, noise,
                                       source_id=source_id, label=label)
        return forward_stack(image, grid, noise, source_id=source_id, label=label)


class TvReconstructor(BaseEstimator, TransformerMixin):
    """Transforms (n, K, H, W) measurement stacks back into (n, H, W) images.

    The LED grid that produced the stacks must be supplied (grid_side,
    spacing, radius) since raw arrays carry no metadata. After transform,
    `results_` holds the per-record ReconResult objects.
    """

    def __init__(self, grid_side=5, spacing=None, radius=5.0, alpha=1e-3,
                 iterations=500, step=1.0, fidelity="l1_smoothed", eps_abs=1e-8,
                 eps_fid=1e-6, backtracking=True, init="cc_measurement"):
        self.grid_side = grid_side
        self.spacing = spacing
        self.radius = radius
        self.alpha = alpha
        self.iterations = iterations
        self.step = step
        self.fidelity = fidelity
        self.eps_abs = eps_abs
        self.eps_fid = eps_fid
        self.backtracking = backtracking
        self.init = init

    def _grid(self):
        return LedGrid(grid_side=self.grid_side, spacing=self.spacing, radius=self.radius)

    def settings(self):
        return ReconSettings(alpha=self.alpha, iterations=self.iterations, step=self.step,
                             fidelity=self.fidelity, eps_abs=self.eps_abs,
                             eps_fid=self.eps_fid, backtracking=self.backtracking,
                             init=self.init)

    def fit(self, X, y=None):
        as_stack_batch(X)
        self.grid_ = self._grid()
        self.settings_ = self.settings()
        return self

    def transform(self, X):
        X = as_stack_batch(X)
        grid = self._grid()
        settings = self.settings()
        if X.shape[1] != grid.num_leds:
            raise ValueError(f"stacks have {X.shape[1]} channels but the grid "
                             f"defines {grid.num_leds} LEDs")
        estimates = np.empty((X.shape[0], *X.shape[2:]))
        self.results_ = []
        for i, measurements in enumerate(X):
            stack = MeasurementStack(measurements, grid=grid, noise=NO_NOISE)
            result = reconstruct(stack, settings)
            self.results_.append(result)
            estimates[i] = result.estimate
        return estimates
