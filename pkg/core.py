"""
Parameter model and frequency grids shared by every stage of the designer.

All quantities are dimensionless: frequencies and rates are measured in units
of the signal/idler bus coupling kappa_is, which is 1 for every run produced by
the configuration layer.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from exceptions import BadGridSpec, NonPositiveRate

logger = logging.getLogger(__name__)

# Default grid extent in linewidths; |M|^2 falls off as 1/detuning^4
DEFAULT_HALFWIDTH_FACTOR = 8.0
DEFAULT_GRID_POINTS = 513


# ============================================================================
# DATA MODELS
# ============================================================================

class Channel(str, Enum):
    """Resonator channel a transfer function belongs to"""
    PUMP = "pump"
    IDLER = "idler"
    SIGNAL = "signal"


@dataclass(frozen=True)
class ResonatorParams:
    """Coupling rates and mode centres of the three-channel ring system"""
    kappa_p: float   # pump bus-ring coupling
    kappa_is: float  # shared signal/idler bus-ring coupling
    g_p: float       # pump inter-ring coupling
    g_is: float      # signal/idler inter-ring coupling
    omega0_p: float = 0.0
    omega0_i: float = 0.0
    omega0_s: float = 0.0

    def kappa(self, channel: Channel) -> float:
        return self.kappa_p if Channel(channel) is Channel.PUMP else self.kappa_is

    def g(self, channel: Channel) -> float:
        return self.g_p if Channel(channel) is Channel.PUMP else self.g_is

    def center(self, channel: Channel) -> float:
        channel = Channel(channel)
        if channel is Channel.PUMP:
            return self.omega0_p
        if channel is Channel.IDLER:
            return self.omega0_i
        return self.omega0_s

    def scaled(self, factor: float) -> "ResonatorParams":
        """Same device with every rate and centre multiplied by `factor`"""
        return ResonatorParams(
            kappa_p=self.kappa_p * factor,
            kappa_is=self.kappa_is * factor,
            g_p=self.g_p * factor,
            g_is=self.g_is * factor,
            omega0_p=self.omega0_p * factor,
            omega0_i=self.omega0_i * factor,
            omega0_s=self.omega0_s * factor,
        )

    def with_couplings(self, g_p: float, g_is: float) -> "ResonatorParams":
        return replace(self, g_p=g_p, g_is=g_is)

    def to_dict(self) -> dict:
        return {
            "kappa_p": self.kappa_p,
            "kappa_is": self.kappa_is,
            "g_p": self.g_p,
            "g_is": self.g_is,
            "omega0_p": self.omega0_p,
            "omega0_i": self.omega0_i,
            "omega0_s": self.omega0_s,
        }


@dataclass(frozen=True)
class PumpSpec:
    """Gaussian pump spectral amplitude with variance parameter sigma"""
    sigma: float
    omega0: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise NonPositiveRate(f"pump variance must be positive, got sigma={self.sigma}")

    @property
    def fwhm(self) -> float:
        return math.sqrt(8.0 * self.sigma * math.log(2.0))

    @classmethod
    def from_fwhm(cls, fwhm: float, omega0: float = 0.0) -> "PumpSpec":
        if not fwhm > 0:
            raise NonPositiveRate(f"pump FWHM must be positive, got {fwhm}")
        return cls(sigma=fwhm * fwhm / (8.0 * math.log(2.0)), omega0=omega0)


@dataclass(frozen=True)
class FrequencyGrid:
    """
    Uniform, odd-sized sampling of [center - half_width, center + half_width]
    with trapezoidal weights. `offsets` are the exact detunings from `center`
    (symmetric, offset 0 at the middle sample).
    """
    center: float
    half_width: float
    n_points: int
    offsets: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    @property
    def points(self) -> np.ndarray:
        return self.center + self.offsets

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def middle(self) -> int:
        return self.n_points // 2

    def refined(self) -> "FrequencyGrid":
        """Same extent with 2N - 1 points (every old sample kept)"""
        return make_grid(self.center, self.half_width, 2 * self.n_points - 1)

    def describe(self) -> dict:
        return {
            "center": self.center,
            "half_width": self.half_width,
            "n_points": self.n_points,
            "step": self.step,
        }


# ============================================================================
# OPERATIONS
# ============================================================================

def validate_params(raw: ResonatorParams) -> ResonatorParams:
    """Return `raw` unchanged when every coupling rate is strictly positive"""
    for name in ("kappa_p", "kappa_is", "g_p", "g_is"):
        value = getattr(raw, name)
        if not (value > 0 and math.isfinite(value)):
            raise NonPositiveRate(f"{name} must be a positive finite rate, got {value}")
    return raw


def make_grid(center: float, half_width: float, n_points: int) -> FrequencyGrid:
    """Uniform grid with trapezoidal (half-weight endpoint) quadrature weights"""
    if not (half_width > 0 and math.isfinite(half_width)):
        raise BadGridSpec(f"half_width must be positive, got {half_width}")
    if int(n_points) != n_points or n_points < 3 or n_points % 2 == 0:
        raise BadGridSpec(f"n_points must be an odd integer >= 3, got {n_points}")
    n_points = int(n_points)

    m = n_points // 2
    step = half_width / m
    offsets = np.arange(-m, m + 1, dtype=float) * step
    weights = np.full(n_points, step)
    weights[0] = weights[-1] = 0.5 * step

    offsets.setflags(write=False)
    weights.setflags(write=False)
    return FrequencyGrid(
        center=float(center),
        half_width=float(half_width),
        n_points=n_points,
        offsets=offsets,
        weights=weights,
    )


def grid_with_step(center: float, min_half_width: float, step: float) -> FrequencyGrid:
    """Smallest odd grid with spacing `step` that covers +/- min_half_width"""
    if not step > 0:
        raise BadGridSpec(f"step must be positive, got {step}")
    # guard against ceil(8.0000000001) when the extent is an exact multiple
    m = max(1, int(math.ceil(min_half_width / step - 1e-9)))
    return make_grid(center, m * step, 2 * m + 1)


def default_mode_grid(params: ResonatorParams, channel: Channel,
                      n_points: int = DEFAULT_GRID_POINTS,
                      halfwidth_factor: float = DEFAULT_HALFWIDTH_FACTOR) -> FrequencyGrid:
    """Grid centred on a channel resonance spanning `halfwidth_factor` linewidths"""
    return make_grid(params.center(channel), halfwidth_factor * params.kappa(channel), n_points)
