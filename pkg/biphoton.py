"""
Pump spectrum, in-cavity pump self-convolution and the joint spectral
amplitude (JSA) of photon pairs generated in the central ring.

The pump integral I_p(omega_i, omega_s) depends on the two frequencies only
through their sum, so it is computed once as a 1-D self-convolution h(Omega)
of the in-cavity pump f = M_p * alpha and looked up for every JSA sample:

    F(omega_i, omega_s) = h(omega_i + omega_s) M_i(omega_i) M_s(omega_s)

Overall constants (nonlinearity, hbar, powers of 2 pi) are dropped; every
downstream quantity is scale invariant.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core import (
    DEFAULT_HALFWIDTH_FACTOR,
    Channel,
    FrequencyGrid,
    PumpSpec,
    ResonatorParams,
    grid_with_step,
    make_grid,
)
from exceptions import BadGridSpec, CarrierMismatch, DegenerateKernel
from transfer import trace, transfer_from_detuning

logger = logging.getLogger(__name__)

# pump grid spacing relative to the finer of the idler/signal spacings
DEFAULT_OVERSAMPLE = 2
MAX_PUMP_POINTS = 2 ** 21 + 1


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class PumpConvolution:
    """h(Omega) sampled on a grid of pair-sum frequencies centred at 2 omega0_p"""
    sum_grid: FrequencyGrid
    values: np.ndarray = field(repr=False, compare=False)

    def at(self, sum_offsets: np.ndarray) -> np.ndarray:
        """Linear interpolation at Omega - 2 omega0_p; zero outside the grid"""
        x = self.sum_grid.offsets
        real = np.interp(sum_offsets, x, self.values.real, left=0.0, right=0.0)
        imag = np.interp(sum_offsets, x, self.values.imag, left=0.0, right=0.0)
        return real + 1j * imag


@dataclass(frozen=True)
class JsaGrid:
    """Complex JSA values indexed [idler, signal]"""
    grid_i: FrequencyGrid
    grid_s: FrequencyGrid
    values: np.ndarray = field(repr=False, compare=False)
    pump_grid: Optional[FrequencyGrid] = None

    def __post_init__(self):
        expected = (self.grid_i.n_points, self.grid_s.n_points)
        if self.values.shape != expected:
            raise BadGridSpec(f"JSA shape {self.values.shape} does not match grids {expected}")
        if not np.any(self.values):
            raise DegenerateKernel("joint spectral amplitude is identically zero")


# ============================================================================
# PUMP
# ============================================================================

def pump_amplitude(pump: PumpSpec, omega):
    """Gaussian pump amplitude (2 pi sigma)^(-1/4) exp(-(omega - omega0)^2 / 4 sigma)"""
    return pump_profile(pump, np.asarray(omega, dtype=float) - pump.omega0)


def pump_profile(pump: PumpSpec, detuning):
    """Pump amplitude as a function of omega - omega0"""
    detuning = np.asarray(detuning, dtype=float)
    norm = (2.0 * math.pi * pump.sigma) ** -0.25
    result = norm * np.exp(-detuning * detuning / (4.0 * pump.sigma))
    if result.ndim == 0:
        return float(result)
    return result


def pump_grid(params: ResonatorParams, pump: Optional[PumpSpec], step: float,
              min_half_width: float = 0.0,
              halfwidth_factor: float = DEFAULT_HALFWIDTH_FACTOR,
              max_points: int = MAX_PUMP_POINTS) -> FrequencyGrid:
    """
    Pump-channel grid spanning halfwidth_factor * max(kappa_p, FWHM); a
    broadband pump (None) spans halfwidth_factor * kappa_p. Raises
    BadGridSpec when the grid would exceed `max_points` samples.
    """
    fwhm = pump.fwhm if pump is not None else 0.0
    extent = max(halfwidth_factor * max(params.kappa_p, fwhm), min_half_width)
    if not step > 0:
        raise BadGridSpec(f"step must be positive, got {step}")
    n_points = 2 * math.ceil(extent / step - 1e-9) + 1
    if n_points > max_points:
        raise BadGridSpec(
            f"pump grid of {n_points} samples (half-width {extent:.4g}, step {step:.3g}) "
            f"exceeds the {max_points}-sample limit"
        )
    return grid_with_step(params.omega0_p, extent, step)


def in_cavity_pump(params: ResonatorParams, pump: Optional[PumpSpec], grid: FrequencyGrid) -> np.ndarray:
    """
    Pump amplitude loaded into the central ring, M_p(omega) alpha(omega).
    With pump=None alpha is flat (the broadband limit) and only M_p remains.
    """
    if abs(grid.center - params.omega0_p) > 1e-9 * params.kappa_p:
        raise BadGridSpec(f"pump grid must be centred at {params.omega0_p}, got {grid.center}")
    transfer = transfer_from_detuning(params.kappa_p, params.g_p, -grid.offsets)
    if pump is None:
        return transfer
    alpha = pump_profile(pump, grid.offsets + (grid.center - pump.omega0))
    return transfer * alpha


def pump_convolution(in_cavity: np.ndarray, grid: FrequencyGrid) -> PumpConvolution:
    """
    Self-convolution h(Omega) = int f(Omega - w) f(w) dw by trapezoidal
    quadrature, evaluated for every pair sum of grid samples (2N - 1 points
    spanning twice the pump extent).
    """
    f = np.asarray(in_cavity, dtype=complex)
    if f.shape != (grid.n_points,):
        raise BadGridSpec(f"expected {grid.n_points} pump samples, got {f.shape}")

    n_out = 2 * grid.n_points - 1
    n_fft = 1 << (n_out - 1).bit_length()
    spectrum = np.fft.fft(f * grid.weights, n_fft) * np.fft.fft(f, n_fft)
    values = np.fft.ifft(spectrum)[:n_out]

    sum_grid = make_grid(2.0 * grid.center, 2.0 * grid.half_width, n_out)
    values.setflags(write=False)
    logger.debug("pump self-convolution on %d sum samples (FFT length %d)", n_out, n_fft)
    return PumpConvolution(sum_grid=sum_grid, values=values)


def flat_convolution(grid_i: FrequencyGrid, grid_s: FrequencyGrid,
                     omega0_p: float = 0.0) -> PumpConvolution:
    """h == 1 over every reachable pair sum; makes the JSA an exact outer product"""
    sum_grid = make_grid(2.0 * omega0_p, 2.0 * (grid_i.half_width + grid_s.half_width), 5)
    return PumpConvolution(sum_grid=sum_grid, values=np.ones(5, dtype=complex))


# ============================================================================
# JOINT SPECTRAL AMPLITUDE
# ============================================================================

def check_carrier(params: ResonatorParams) -> None:
    mismatch = 2.0 * params.omega0_p - (params.omega0_i + params.omega0_s)
    if abs(mismatch) > 1e-9 * params.kappa_is:
        raise CarrierMismatch(
            f"2*omega0_p must equal omega0_i + omega0_s (mismatch {mismatch:.3e})"
        )


def jsa_pump_grid(params: ResonatorParams, pump: Optional[PumpSpec], grid_i: FrequencyGrid,
                  grid_s: FrequencyGrid, oversample: int = DEFAULT_OVERSAMPLE) -> FrequencyGrid:
    """Pump grid used by `jsa`: finer than the mode grids, covering every pair sum"""
    step = min(grid_i.step, grid_s.step) / oversample
    return pump_grid(params, pump, step, min_half_width=0.5 * (grid_i.half_width + grid_s.half_width))


def jsa(params: ResonatorParams, pump: Optional[PumpSpec], grid_i: FrequencyGrid, grid_s: FrequencyGrid,
        convolution: Optional[PumpConvolution] = None,
        oversample: int = DEFAULT_OVERSAMPLE) -> JsaGrid:
    """
    F[j, k] = h(omega_i[j] + omega_s[k]) M_i(omega_i[j]) M_s(omega_s[k]).

    pump=None gives the broadband limit (flat alpha, h set by M_p alone).
    `convolution` replaces the computed pump self-convolution (pass
    `flat_convolution(...)` for a separable reference state).
    """
    check_carrier(params)
    m_i = trace(params, grid_i, Channel.IDLER).values
    m_s = trace(params, grid_s, Channel.SIGNAL).values

    p_grid = None
    if convolution is None:
        p_grid = jsa_pump_grid(params, pump, grid_i, grid_s, oversample)
        convolution = pump_convolution(in_cavity_pump(params, pump, p_grid), p_grid)

    # the carrier condition turns Omega - 2 omega0_p into a sum of detunings
    sums = grid_i.offsets[:, None] + grid_s.offsets[None, :]
    values = convolution.at(sums) * m_i[:, None] * m_s[None, :]
    logger.debug("JSA assembled on %dx%d grid", grid_i.n_points, grid_s.n_points)
    return JsaGrid(grid_i=grid_i, grid_s=grid_s, values=values, pump_grid=p_grid)


def jsi(amplitude: JsaGrid) -> np.ndarray:
    """Joint spectral intensity |F|^2 normalized to unit peak"""
    intensity = np.abs(amplitude.values) ** 2
    return intensity / intensity.max()


def jsi_correlation(amplitude: JsaGrid) -> float:
    """Pearson correlation between idler and signal detunings under the JSI"""
    weights = jsi(amplitude) * amplitude.grid_i.weights[:, None] * amplitude.grid_s.weights[None, :]
    weights = weights / weights.sum()
    x = amplitude.grid_i.offsets[:, None]
    y = amplitude.grid_s.offsets[None, :]
    mean_x = float(np.sum(weights * x))
    mean_y = float(np.sum(weights * y))
    cov = float(np.sum(weights * (x - mean_x) * (y - mean_y)))
    var_x = float(np.sum(weights * (x - mean_x) ** 2))
    var_y = float(np.sum(weights * (y - mean_y) ** 2))
    return cov / math.sqrt(var_x * var_y)
