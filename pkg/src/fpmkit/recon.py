"""TV-regularized reconstruction from a measurement stack.

Minimizes, over real non-negative images u,

    E(u) = sum_k H(f^k, m^k(u)) + alpha * tv(u)

where m^k(u) = sqrt(|ifft2(mask_k * fft2(u))|^2 + eps_abs^2) is the smoothed
modulus of the band-limited field, H is either a smoothed l1 or an l2
discrepancy, and tv is smoothed anisotropic total variation. Projected
gradient descent with optional backtracking keeps every iterate >= 0, which
encodes the zero-phase prior on the object.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .fourier import fft2, ifft2
from .geometry import grid_masks
from .metrics import mse, psnr  # noqa: F401  (psnr is part of this module's surface)
from .validation import as_real_image

FIDELITIES = ("l1_smoothed", "l2")
INITS = ("zeros", "cc_measurement")
MAX_HALVINGS = 30


@dataclass(frozen=True)
class ReconSettings:
    alpha: float = 1e-3
    iterations: int = 500
    step: float = 1.0
    fidelity: str = "l1_smoothed"
    eps_abs: float = 1e-8
    eps_fid: float = 1e-6
    backtracking: bool = True
    init: str = "cc_measurement"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.step <= 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if self.fidelity not in FIDELITIES:
            raise ValueError(f"fidelity must be one of {FIDELITIES}, got {self.fidelity!r}")
        if self.eps_abs <= 0:
            raise ValueError(f"eps_abs must be > 0, got {self.eps_abs}")
        if self.eps_fid <= 0:
            raise ValueError(f"eps_fid must be > 0, got {self.eps_fid}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")


@dataclass
class ReconResult:
    estimate: np.ndarray
    energy_trace: np.ndarray
    settings: ReconSettings
    stalled_iterations: list[int] = field(default_factory=list)

    @property
    def stalled(self):
        return bool(self.stalled_iterations)


def tv(u, eps=0.0):
    """Smoothed anisotropic total variation with Neumann boundaries.

    Forward differences, zero at the last row/column; every term enters as
    sqrt(d^2 + eps^2), so a constant image scores 2*H*W*eps (exactly 0 when
    eps=0).
    """
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise ValueError("tv: input contains non-finite values")
    dx = np.zeros_like(u)
    dy = np.zeros_like(u)
    dx[:, :-1] = u[:, 1:] - u[:, :-1]
    dy[:-1, :] = u[1:, :] - u[:-1, :]
    if eps == 0.0:
        return float(np.abs(dx).sum() + np.abs(dy).sum())
    return float(np.sqrt(dx * dx + eps * eps).sum() + np.sqrt(dy * dy + eps * eps).sum())


def tv_gradient(u, eps):
    """Gradient of :func:`tv` (requires eps > 0 for differentiability)."""
    u = np.asarray(u, dtype=np.float64)
    dx = np.zeros_like(u)
    dy = np.zeros_like(u)
    dx[:, :-1] = u[:, 1:] - u[:, :-1]
    dy[:-1, :] = u[1:, :] - u[:-1, :]
    wx = dx / np.sqrt(dx * dx + eps * eps)
    wy = dy / np.sqrt(dy * dy + eps * eps)
    grad = np.zeros_like(u)
    grad[:, 1:] += wx[:, :-1]
    grad[:, :-1] -= wx[:, :-1]
    grad[1:, :] += wy[:-1, :]
    grad[:-1, :] -= wy[:-1, :]
    return grad


def _stack_supports(stack):
    if stack.is_multiplexed:
        raise ValueError("multiplexed stacks carry no per-channel pupil masks; "
                         "reconstruction needs single-LED measurements")
    if stack.num_channels == 0:
        return []
    if stack.grid is None:
        raise ValueError("stack metadata lacks the LED grid needed to rebuild masks")
    return [m.support for m in grid_masks(stack.grid, stack.image_shape)]


def _smoothed_moduli(u, supports, eps_abs):
    """Band-limited complex fields g_k and smoothed moduli m_k for all channels."""
    spectrum = fft2(u)
    fields = [ifft2(s * spectrum) for s in supports]
    moduli = [np.sqrt(g.real * g.real + g.imag * g.imag + eps_abs * eps_abs) for g in fields]
    return fields, moduli


def _discrepancy(f, m, settings):
    d = f - m
    if settings.fidelity == "l2":
        return 0.5 * float((d * d).sum())
    return float(np.sqrt(d * d + settings.eps_fid * settings.eps_fid).sum())


def _discrepancy_slope(f, m, settings):
    """dH/dm evaluated elementwise at (f, m)."""
    d = m - f
    if settings.fidelity == "l2":
        return d
    return d / np.sqrt(d * d + settings.eps_fid * settings.eps_fid)


def data_energy(u, stack, settings=ReconSettings()):
    """Sum of per-channel discrepancies between stack measurements and model."""
    u = as_real_image(u, "u")
    supports = _stack_supports(stack)
    if stack.num_channels and u.shape != stack.image_shape:
        raise ValueError(f"u has shape {u.shape} but stack images are {stack.image_shape}")
    _, moduli = _smoothed_moduli(u, supports, settings.eps_abs)
    return sum(_discrepancy(stack.measurements[k], moduli[k], settings)
               for k in range(len(supports)))


def total_energy(u, stack, settings=ReconSettings()):
    return data_energy(u, stack, settings) + settings.alpha * tv(u, settings.eps_abs)


def energy_gradient(u, stack, settings=ReconSettings()):
    """Gradient of total_energy with respect to the real image u.

    Per channel, with g the band-limited complex field, m its smoothed
    modulus and r = dH/dm: the data term contributes
    Re(ifft2(mask * fft2(r * g / m))); the crop-then-band-limit operator is
    self-adjoint under unitary transforms, which the chain exploits.
    """
    u = as_real_image(u, "u")
    supports = _stack_supports(stack)
    if stack.num_channels and u.shape != stack.image_shape:
        raise ValueError(f"u has shape {u.shape} but stack images are {stack.image_shape}")
    fields, moduli = _smoothed_moduli(u, supports, settings.eps_abs)
    grad = settings.alpha * tv_gradient(u, settings.eps_abs) if settings.alpha else np.zeros_like(u)
    if supports:
        back_spectrum = np.zeros(u.shape, dtype=np.complex128)
        for k, s in enumerate(supports):
            r = _discrepancy_slope(stack.measurements[k], moduli[k], settings)
            back_spectrum += s * fft2(r * fields[k] / moduli[k])
        grad = grad + ifft2(back_spectrum).real
    return grad


def _initial_estimate(stack, settings):
    # An empty (K=0) stack still carries (H, W), so init falls back to zeros.
    if settings.init == "cc_measurement" and stack.num_channels and not stack.is_multiplexed:
        return stack.measurements[stack.cc_index].copy()
    return np.zeros(stack.image_shape)


def reconstruct(stack, settings=ReconSettings()):
    """Projected gradient descent on total_energy.

    Each iteration takes u <- max(u - step * grad, 0). With backtracking the
    step is halved until the energy does not increase (at most MAX_HALVINGS
    times; on exhaustion the iterate is kept and the iteration is flagged as
    stalled), and the accepted step carries over, doubling again on success
    up to the configured step. The energy of the accepted iterate is
    recorded once per iteration.
    """
    supports = _stack_supports(stack)
    u = _initial_estimate(stack, settings)

    def energy(x):
        _, moduli = _smoothed_moduli(x, supports, settings.eps_abs)
        e = sum(_discrepancy(stack.measurements[k], moduli[k], settings)
                for k in range(len(supports)))
        if settings.alpha:
            e += settings.alpha * tv(x, settings.eps_abs)
        return e

    trace = []
    stalled = []
    # Overflow on the way to a non-finite energy is detected and reported
    # explicitly below, so the elementwise warnings are suppressed.
    with np.errstate(over="ignore", invalid="ignore"):
        current = energy(u)
        if not math.isfinite(current):
            raise NumericalError("non-finite energy at the initial estimate",
                                 partial=ReconResult(u, np.asarray(trace), settings, stalled))
        step = settings.step
        for it in range(settings.iterations):
            grad = energy_gradient(u, stack, settings)
            if not np.all(np.isfinite(grad)):
                raise NumericalError(
                    f"non-finite gradient at iteration {it}",
                    partial=ReconResult(u, np.asarray(trace), settings, stalled))
            if settings.backtracking:
                accepted = False
                for _ in range(MAX_HALVINGS + 1):
                    candidate = np.maximum(u - step * grad, 0.0)
                    cand_energy = energy(candidate)
                    if not math.isfinite(cand_energy):
                        step *= 0.5
                        continue
                    if cand_energy <= current:
                        accepted = True
                        break
                    step *= 0.5
                if accepted:
                    u, current = candidate, cand_energy
                    step = min(step * 2.0, settings.step)
                else:
                    stalled.append(it)
            else:
                u = np.maximum(u - step * grad, 0.0)
                current = energy(u)
                if not math.isfinite(current):
                    raise NumericalError(
                        f"non-finite energy at iteration {it}",
                        partial=ReconResult(u, np.asarray(trace), settings, stalled))
            trace.append(current)
    return ReconResult(estimate=u, energy_trace=np.asarray(trace), settings=settings,
                       stalled_iterations=stalled)
