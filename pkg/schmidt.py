"""
Schmidt decomposition of a sampled joint spectral amplitude.

The continuous kernel F(omega_i, omega_s) is discretized as
A[j, k] = sqrt(w_i[j]) F[j, k] sqrt(w_s[k]) with trapezoidal weights w, so the
singular values of A approximate those of the integral operator. Schmidt
coefficients are the normalized squared singular values; K = 1 / sum(lambda^2).
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from biphoton import DEFAULT_OVERSAMPLE, JsaGrid, flat_convolution, jsa
from core import (
    DEFAULT_HALFWIDTH_FACTOR,
    Channel,
    PumpSpec,
    ResonatorParams,
    default_mode_grid,
)
from exceptions import BadGridSpec, DegenerateKernel, NoConvergence, NotNormalized

logger = logging.getLogger(__name__)

TRUNCATION_FLOOR = 1e-14
MAX_GRID_POINTS = 8193


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class SchmidtResult:
    """Normalized Schmidt coefficients with Schmidt number and heralded purity"""
    coefficients: np.ndarray = field(repr=False, compare=False)
    schmidt_number: float
    purity: float
    n_retained: int
    grid_points: int = 0
    idler_modes: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    signal_modes: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def modes(self, n: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """n-th idler/signal mode functions (requires `with_modes=True`)"""
        if self.idler_modes is None or self.signal_modes is None:
            raise ValueError("Schmidt modes were not computed; decompose with with_modes=True")
        return self.idler_modes[:, n], self.signal_modes[:, n]

    def summary(self, top: int = 10) -> dict:
        return {
            "schmidt_number": self.schmidt_number,
            "purity": self.purity,
            "n_retained": self.n_retained,
            "grid_points": self.grid_points,
            "coefficients": [float(c) for c in self.coefficients[:top]],
        }


# ============================================================================
# DECOMPOSITION
# ============================================================================

def schmidt_number(coefficients: Sequence[float]) -> float:
    """K = 1 / sum(lambda_n^2) for coefficients summing to one"""
    lam = np.asarray(coefficients, dtype=float)
    total = float(lam.sum())
    if abs(total - 1.0) > 1e-9:
        raise NotNormalized(f"Schmidt coefficients sum to {total!r}, expected 1")
    return float(1.0 / np.sum(lam * lam))


def schmidt_decompose(amplitude: JsaGrid, with_modes: bool = False) -> SchmidtResult:
    """Quadrature-weighted SVD of the JSA"""
    root_w_i = np.sqrt(amplitude.grid_i.weights)
    root_w_s = np.sqrt(amplitude.grid_s.weights)
    kernel = root_w_i[:, None] * amplitude.values * root_w_s[None, :]
    if not np.any(kernel):
        raise DegenerateKernel("weighted JSA kernel is identically zero")

    idler_modes = signal_modes = None
    if with_modes:
        u, s, vh = np.linalg.svd(kernel, full_matrices=False)
    else:
        s = np.linalg.svd(kernel, compute_uv=False)

    # numerical noise floor
    keep = s > TRUNCATION_FLOOR * s[0]
    s_kept = s[keep]
    power = s_kept * s_kept
    coefficients = power / power.sum()
    k = schmidt_number(coefficients)

    if with_modes:
        idler_modes = u[:, keep] / root_w_i[:, None]
        signal_modes = vh[keep, :].T / root_w_s[:, None]

    return SchmidtResult(
        coefficients=coefficients,
        schmidt_number=k,
        purity=1.0 / k,
        n_retained=int(keep.sum()),
        grid_points=int(amplitude.grid_i.n_points),
        idler_modes=idler_modes,
        signal_modes=signal_modes,
    )


def schmidt_at_resolution(params: ResonatorParams, pump: Optional[PumpSpec], n_points: int,
                          halfwidth_factor: float = DEFAULT_HALFWIDTH_FACTOR,
                          flat_pump: bool = False,
                          oversample: int = DEFAULT_OVERSAMPLE) -> SchmidtResult:
    """
    Decompose the JSA on default idler/signal grids with n_points samples
    each; pump=None evaluates the broadband limit.
    """
    grid_i = default_mode_grid(params, Channel.IDLER, n_points, halfwidth_factor)
    grid_s = default_mode_grid(params, Channel.SIGNAL, n_points, halfwidth_factor)
    convolution = flat_convolution(grid_i, grid_s, params.omega0_p) if flat_pump else None
    amplitude = jsa(params, pump, grid_i, grid_s, convolution=convolution, oversample=oversample)
    return schmidt_decompose(amplitude)


def converged_schmidt(params: ResonatorParams, pump: Optional[PumpSpec], base_n: int, tol: float,
                      halfwidth_factor: float = DEFAULT_HALFWIDTH_FACTOR,
                      max_n: int = MAX_GRID_POINTS,
                      flat_pump: bool = False,
                      oversample: int = DEFAULT_OVERSAMPLE) -> Tuple[SchmidtResult, float]:
    """
    Refine the grid N -> 2N - 1 (fixed extent) until successive Schmidt
    numbers differ by less than `tol`. Returns the finest result and the
    last difference; raises NoConvergence once the next refinement would
    exceed `max_n`.
    """
    if base_n < 3 or base_n % 2 == 0:
        raise BadGridSpec(f"base_n must be odd and >= 3, got {base_n}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    n = base_n
    current = schmidt_at_resolution(params, pump, n, halfwidth_factor, flat_pump, oversample)
    error = float("inf")
    previous_error = None

    while True:
        n_next = 2 * n - 1
        if n_next > max_n:
            raise NoConvergence(
                f"Schmidt number not converged to {tol:g} within {max_n} points "
                f"(last change {error:.3e} at N={n})",
                best=current,
                error=error,
                n_points=n,
            )
        finer = schmidt_at_resolution(params, pump, n_next, halfwidth_factor, flat_pump, oversample)
        error = abs(finer.schmidt_number - current.schmidt_number)
        logger.debug("K(N=%d)=%.10f K(N=%d)=%.10f change=%.3e",
                     n, current.schmidt_number, n_next, finer.schmidt_number, error)

        if previous_error is not None and error > previous_error:
            logger.warning("⚠️ non-monotone grid convergence: change %.3e after %.3e at N=%d",
                           error, previous_error, n_next)
        if error < tol:
            return finer, error

        previous_error = error
        current, n = finer, n_next
