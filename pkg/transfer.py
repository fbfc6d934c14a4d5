"""
Spectral transfer functions of the coupled-ring system.

A bus-coupled outer ring (rate kappa) exchanges photons with the central ring
at rate g. Loading the central ring through that pair gives, with detuning
Delta = omega0 - omega,

    M(Delta) = 2 g sqrt(kappa) / (-2 Delta^2 + 2 g^2 + i Delta kappa)

for the pump (kappa_p, g_p) and for the signal/idler modes (kappa_is, g_is).
The argument of M is odd in Delta and its cubic term vanishes at
g = kappa / sqrt(12), which flattens the group delay around resonance.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from core import Channel, FrequencyGrid, ResonatorParams, validate_params
from exceptions import BadGridSpec, NonPositiveRate, UnsupportedOrder

logger = logging.getLogger(__name__)

SQRT12 = math.sqrt(12.0)
DERIVATIVE_STEP_FACTOR = 1e-3

# Second-order central stencils {offset: weight} for the l-th derivative
_STENCILS: Dict[int, Dict[int, float]] = {
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 0: 0.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
    5: {-3: -0.5, -2: 2.0, -1: -2.5, 0: 0.0, 1: 2.5, 2: -2.0, 3: 0.5},
}


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class TransferTrace:
    """Transfer function sampled on a grid centred at the channel resonance"""
    grid: FrequencyGrid
    values: np.ndarray = field(repr=False, compare=False)
    phase: np.ndarray = field(repr=False, compare=False)
    channel: Channel
    kappa: float
    g: float

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


# ============================================================================
# CLOSED-FORM TRANSFER FUNCTIONS
# ============================================================================

def transfer_from_detuning(kappa: float, g: float, detuning):
    """M evaluated at detuning(s) Delta = omega0 - omega; scalar or array"""
    delta = np.asarray(detuning, dtype=float)
    denominator = (-2.0 * delta * delta + 2.0 * g * g) + 1j * (delta * kappa)
    result = (2.0 * g * math.sqrt(kappa)) / denominator
    if result.ndim == 0:
        return complex(result)
    return result


def pump_transfer(params: ResonatorParams, omega: float) -> complex:
    """Pump loading transfer M_p at absolute frequency omega"""
    return transfer_from_detuning(params.kappa_p, params.g_p, params.omega0_p - omega)


def mode_transfer(params: ResonatorParams, omega: float, channel: Channel) -> complex:
    """Signal or idler transfer M_m at absolute frequency omega"""
    channel = Channel(channel)
    if channel is Channel.PUMP:
        raise ValueError("mode_transfer covers the idler and signal channels only")
    return transfer_from_detuning(params.kappa_is, params.g_is, params.center(channel) - omega)


def peak_magnitude(params: ResonatorParams, channel: Channel) -> float:
    """Exact maximum of |M| over all detunings"""
    kappa, g = params.kappa(channel), params.g(channel)
    if g * g <= kappa * kappa / 8.0:
        return math.sqrt(kappa) / g
    return 2.0 * g * math.sqrt(kappa) / math.sqrt(g * g * kappa * kappa - kappa ** 4 / 16.0)


def optimal_coupling(kappa: float) -> float:
    """Inter-ring coupling that cancels the cubic phase term: kappa / sqrt(12)"""
    if not (kappa > 0 and math.isfinite(kappa)):
        raise NonPositiveRate(f"kappa must be positive, got {kappa}")
    return kappa / SQRT12


def coupled_params(kappa_p: float, kappa_is: float = 1.0,
                   g_p_over_opt: float = 1.0, g_is_over_opt: float = 1.0,
                   omega0_p: float = 0.0, omega0_i: float = 0.0,
                   omega0_s: float = 0.0) -> ResonatorParams:
    """Device with inter-ring couplings given as multiples of the optimum"""
    return validate_params(ResonatorParams(
        kappa_p=kappa_p,
        kappa_is=kappa_is,
        g_p=g_p_over_opt * optimal_coupling(kappa_p),
        g_is=g_is_over_opt * optimal_coupling(kappa_is),
        omega0_p=omega0_p,
        omega0_i=omega0_i,
        omega0_s=omega0_s,
    ))


def phase_slope_limit(params: ResonatorParams, channel: Channel) -> float:
    """On-resonance delay kappa / (2 g^2), the limit of phase/detuning"""
    g = params.g(channel)
    return params.kappa(channel) / (2.0 * g * g)


# ============================================================================
# SAMPLED TRACES AND DELAY
# ============================================================================

def trace(params: ResonatorParams, grid: FrequencyGrid, channel: Channel) -> TransferTrace:
    """Sample M on `grid` and unwrap its argument with phase(center) = 0"""
    channel = Channel(channel)
    kappa, g = params.kappa(channel), params.g(channel)
    center = params.center(channel)
    if abs(grid.center - center) > 1e-9 * kappa:
        raise BadGridSpec(
            f"{channel.value} grid must be centred at {center}, got {grid.center}"
        )

    # grid offsets are omega - omega0
    values = transfer_from_detuning(kappa, g, -grid.offsets)
    phase = np.unwrap(np.angle(values))
    phase = phase - phase[grid.middle]

    if logger.isEnabledFor(logging.DEBUG):
        bound = peak_magnitude(params, channel)
        peak = float(np.max(np.abs(values)))
        logger.debug("%s trace: max |M| = %.12g (bound %.12g)", channel.value, peak, bound)
        if peak > bound * (1.0 + 1e-12):
            raise ArithmeticError(f"|M| = {peak!r} exceeds its closed-form maximum {bound!r}")

    values.setflags(write=False)
    phase.setflags(write=False)
    return TransferTrace(grid=grid, values=values, phase=phase, channel=channel, kappa=kappa, g=g)


def delay_function(tr: TransferTrace) -> np.ndarray:
    """T(omega) = phase / (omega - omega0); the centre sample takes kappa/(2 g^2)"""
    offsets = tr.grid.offsets
    delay = np.empty_like(offsets)
    off_center = offsets != 0.0
    delay[off_center] = tr.phase[off_center] / offsets[off_center]
    delay[~off_center] = tr.kappa / (2.0 * tr.g * tr.g)
    return delay


def relative_delay(tr: TransferTrace) -> np.ndarray:
    """T(omega) / T(omega0)"""
    delay = delay_function(tr)
    return delay / delay[tr.grid.middle]


def flatness(tr: TransferTrace, window: float) -> float:
    """Maximum |T/T(0) - 1| over |omega - omega0| <= window"""
    inside = np.abs(tr.grid.offsets) <= window * (1.0 + 1e-12)
    return float(np.max(np.abs(relative_delay(tr)[inside] - 1.0)))


def plateau_halfwidth(tr: TransferTrace, eps: float = 0.01) -> float:
    """Largest half-width around resonance where |T/T(0) - 1| stays <= eps"""
    deviation = np.abs(relative_delay(tr) - 1.0)
    mid = tr.grid.middle
    k = 0
    while k < mid and deviation[mid - k - 1] <= eps and deviation[mid + k + 1] <= eps:
        k += 1
    return float(tr.grid.offsets[mid + k])


# ============================================================================
# PHASE DERIVATIVES
# ============================================================================

def _stencil_derivative(kappa: float, g: float, order: int, h: float) -> float:
    # Arg(M) is odd in the detuning, so +/- stencil pairs are combined first;
    # even orders then vanish exactly instead of to rounding.
    stencil = _STENCILS[order]
    sign = -1.0 if order % 2 else 1.0
    total = 0.0
    for k in sorted(o for o in stencil if o > 0):
        plus = np.angle(transfer_from_detuning(kappa, g, -k * h))
        minus = np.angle(transfer_from_detuning(kappa, g, k * h))
        total += stencil[k] * (plus + sign * minus)
    total += stencil[0] * float(np.angle(transfer_from_detuning(kappa, g, 0.0)))
    return total / h ** order


def phase_derivative_at_center(params: ResonatorParams, channel: Channel, order: int,
                               step_factor: float = DERIVATIVE_STEP_FACTOR) -> float:
    """
    order-th derivative of Arg(M) with respect to omega at the resonance.

    Central differences with step h = step_factor * kappa, refined by two
    Richardson step-halvings (h, h/2, h/4) to cancel the h^2 and h^4 errors.
    """
    if order not in _STENCILS:
        raise UnsupportedOrder(f"phase derivative order must be one of 2..5, got {order}")
    kappa, g = params.kappa(channel), params.g(channel)
    h = step_factor * kappa

    d1, d2, d4 = (_stencil_derivative(kappa, g, order, h / s) for s in (1.0, 2.0, 4.0))
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d4 - d2) / 3.0
    result = (16.0 * r2 - r1) / 15.0
    logger.debug("d^%d Arg M_%s at resonance: %.6e (raw %.6e)",
                 order, Channel(channel).value, result, d1)
    return float(result)


def phase_slope_at_center(params: ResonatorParams, channel: Channel,
                          step_factor: float = 1e-4) -> float:
    """First derivative of Arg(M) at resonance by a Richardson-refined central difference"""
    kappa, g = params.kappa(channel), params.g(channel)
    h = step_factor * kappa

    def central(step: float) -> float:
        plus = float(np.angle(transfer_from_detuning(kappa, g, -step)))
        minus = float(np.angle(transfer_from_detuning(kappa, g, step)))
        return (plus - minus) / (2.0 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def third_derivative_bracket(kappa: float, low: float = 0.9, high: float = 1.1) -> Tuple[float, float]:
    """Third phase derivative at low*g_opt and high*g_opt (opposite signs)"""
    g_opt = optimal_coupling(kappa)
    values = []
    for factor in (low, high):
        p = ResonatorParams(kappa_p=kappa, kappa_is=kappa, g_p=factor * g_opt, g_is=factor * g_opt)
        values.append(phase_derivative_at_center(p, Channel.PUMP, 3))
    return values[0], values[1]
