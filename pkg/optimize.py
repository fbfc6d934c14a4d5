"""
Pump-bandwidth optimization of the Schmidt number.

K(sigma) is minimized by golden-section search on log(sigma). Each K is a
grid-converged value (inner tolerance ten times tighter than the outer one)
so discretization noise cannot steer the line search.

For optimally coupled devices K usually keeps decreasing as the pump
broadens and levels off at the broadband limit K_inf (flat pump spectrum,
in-cavity pump shaped by M_p alone). That case is reported as a plateau
record with sigma_opt = inf and k_min = K_inf.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence

from core import DEFAULT_GRID_POINTS, DEFAULT_HALFWIDTH_FACTOR, PumpSpec, ResonatorParams, validate_params
from exceptions import BadBracket, NoConvergence, NonPositiveRate, SourceDesignError
from schmidt import MAX_GRID_POINTS, converged_schmidt
from transfer import coupled_params, optimal_coupling

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1 / phi
DEFAULT_TOL = 1e-4
FWHM_BRACKET = (0.05, 5.0)  # in units of kappa_p
PLATEAU_STATUS = "plateau"
LN2 = math.log(2.0)


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class OptimizationRecord:
    """Outcome of one pump-width minimization"""
    ratio: float
    sigma_opt: float
    fwhm_over_kappa_p: float
    k_min: float
    purity: float
    n_evals: int
    converged: bool
    status: str = "ok"
    k_plateau: Optional[float] = None

    @property
    def is_plateau(self) -> bool:
        return self.status.startswith(PLATEAU_STATUS)

    def to_dict(self) -> dict:
        return asdict(self)


def sigma_from_fwhm(fwhm: float) -> float:
    return fwhm * fwhm / (8.0 * LN2)


def _record(params: ResonatorParams, sigma: float, k: float, n_evals: int,
            converged: bool, status: str = "ok",
            k_plateau: Optional[float] = None) -> OptimizationRecord:
    return OptimizationRecord(
        ratio=params.kappa_p / params.kappa_is,
        sigma_opt=sigma,
        fwhm_over_kappa_p=math.sqrt(8.0 * sigma * LN2) / params.kappa_p,
        k_min=k,
        purity=1.0 / k,
        n_evals=n_evals,
        converged=converged,
        status=status,
        k_plateau=k_plateau,
    )


# ============================================================================
# LINE SEARCH
# ============================================================================

def optimize_pump_width(params: ResonatorParams, sigma_lo: float, sigma_hi: float,
                        tol: float = DEFAULT_TOL,
                        keep_couplings: bool = False,
                        base_n: int = DEFAULT_GRID_POINTS,
                        halfwidth_factor: float = DEFAULT_HALFWIDTH_FACTOR,
                        max_n: int = MAX_GRID_POINTS,
                        k_of_sigma: Optional[Callable[[float], float]] = None) -> OptimizationRecord:
    """
    Minimize K over the pump variance in [sigma_lo, sigma_hi].

    The search stops once the log(sigma) bracket is narrower than `tol`; K is
    evaluated with converged_schmidt at tol / 10. Couplings are reset to
    kappa / sqrt(12) unless `keep_couplings` is set. `k_of_sigma` replaces the
    Schmidt-number evaluation (used to exercise the search on known functions);
    k_of_sigma(inf) then stands for the broadband limit.

    When K falls toward sigma_hi without an interior minimum and the broadband
    limit is no higher than K(sigma_hi), a plateau record is returned
    (sigma_opt = inf, k_min = k_plateau = K_inf). A minimum pinned at sigma_lo
    raises BadBracket carrying the best evaluated record.
    """
    validate_params(params)
    if not sigma_lo > 0:
        raise NonPositiveRate(f"sigma_lo must be positive, got {sigma_lo}")
    if not sigma_hi > sigma_lo:
        raise ValueError(f"sigma_hi ({sigma_hi}) must exceed sigma_lo ({sigma_lo})")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    if not keep_couplings:
        params = params.with_couplings(optimal_coupling(params.kappa_p), optimal_coupling(params.kappa_is))

    cache: Dict[float, float] = {}
    grid_converged = [True]

    def schmidt(pump: Optional[PumpSpec]) -> float:
        try:
            result, _ = converged_schmidt(params, pump, base_n, tol / 10.0,
                                          halfwidth_factor=halfwidth_factor, max_n=max_n)
        except NoConvergence as exc:
            label = "broadband limit" if pump is None else f"sigma={pump.sigma:.6g}"
            logger.warning("⚠️ %s: %s; using best estimate", label, exc)
            grid_converged[0] = False
            result = exc.best
        return result.schmidt_number

    def evaluate(x: float) -> float:
        if x in cache:
            return cache[x]
        sigma = math.exp(x)
        if k_of_sigma is not None:
            k = float(k_of_sigma(sigma))
        else:
            k = schmidt(PumpSpec(sigma=sigma, omega0=params.omega0_p))
        logger.debug("K(sigma=%.8g) = %.10f", sigma, k)
        cache[x] = k
        return k

    def broadband_limit() -> float:
        if k_of_sigma is not None:
            return float(k_of_sigma(math.inf))
        return schmidt(None)

    def best_record(converged: bool, status: str = "ok") -> OptimizationRecord:
        x_best = min(cache, key=cache.get)
        return _record(params, math.exp(x_best), cache[x_best], len(cache), converged, status)

    a, b = math.log(sigma_lo), math.log(sigma_hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    ka, kb, kc, kd = evaluate(a), evaluate(b), evaluate(c), evaluate(d)

    if min(ka, kb) < min(kc, kd):
        if kb < ka:
            k_inf = broadband_limit()
            logger.debug("K(broadband limit) = %.10f", k_inf)
            if k_inf <= kb + tol / 10.0:
                record = _record(
                    params, math.inf, k_inf, len(cache) + 1, grid_converged[0],
                    f"{PLATEAU_STATUS}: K decreasing to K_inf={k_inf:.10f} as the pump broadens "
                    f"(K={kb:.10f} at sigma={sigma_hi:.4g})",
                    k_plateau=k_inf,
                )
                logger.info("ratio %.4g: no interior optimum; K -> %.8f for a broadband pump",
                            record.ratio, k_inf)
                return record
        raise BadBracket(
            f"K minimum not bracketed by sigma in [{sigma_lo:.4g}, {sigma_hi:.4g}] "
            f"(endpoints {ka:.8f}, {kb:.8f}; interior {kc:.8f}, {kd:.8f})",
            best=best_record(False, "BadBracket"),
        )

    while b - a > tol:
        if kc < kd:
            b, d, kd = d, c, kc
            c = b - INV_PHI * (b - a)
            kc = evaluate(c)
        else:
            a, c, kc = c, d, kd
            d = a + INV_PHI * (b - a)
            kd = evaluate(d)

    record = best_record(grid_converged[0])
    logger.info("ratio %.4g: K_min=%.8f at FWHM=%.4f kappa_p after %d evaluations",
                record.ratio, record.k_min, record.fwhm_over_kappa_p, record.n_evals)
    return record


# ============================================================================
# RATIO SWEEP
# ============================================================================

def _failed_record(ratio: float, status: str) -> OptimizationRecord:
    nan = float("nan")
    return OptimizationRecord(ratio=ratio, sigma_opt=nan, fwhm_over_kappa_p=nan, k_min=nan,
                              purity=nan, n_evals=0, converged=False, status=status)


def optimize_ratio(ratio: float, tol: float = DEFAULT_TOL,
                   g_p_over_opt: float = 1.0, g_is_over_opt: float = 1.0,
                   base_n: int = DEFAULT_GRID_POINTS,
                   halfwidth_factor: float = DEFAULT_HALFWIDTH_FACTOR,
                   max_n: int = MAX_GRID_POINTS,
                   expansions: int = 2) -> OptimizationRecord:
    """
    Optimize one kappa_p/kappa_is ratio from the FWHM bracket [0.05, 5] kappa_p,
    widening it tenfold toward the better endpoint on BadBracket. A plateau
    record is returned as is. Errors are returned as a record status instead
    of raised.
    """
    try:
        if ratio < 1:
            raise ValueError(f"kappa_p/kappa_is ratio must be >= 1, got {ratio}")
        params = coupled_params(ratio, 1.0, g_p_over_opt, g_is_over_opt)
        fwhm_lo, fwhm_hi = (f * params.kappa_p for f in FWHM_BRACKET)
        keep = g_p_over_opt != 1.0 or g_is_over_opt != 1.0

        for attempt in range(expansions + 1):
            try:
                return optimize_pump_width(
                    params, sigma_from_fwhm(fwhm_lo), sigma_from_fwhm(fwhm_hi), tol,
                    keep_couplings=keep, base_n=base_n,
                    halfwidth_factor=halfwidth_factor, max_n=max_n,
                )
            except BadBracket as exc:
                if attempt == expansions:
                    logger.warning("⚠️ ratio %.4g: %s", ratio, exc)
                    return exc.best
                fwhm_best = exc.best.fwhm_over_kappa_p * params.kappa_p
                if abs(fwhm_best - fwhm_lo) <= abs(fwhm_best - fwhm_hi):
                    fwhm_lo /= 10.0
                else:
                    fwhm_hi *= 10.0
                logger.warning("⚠️ ratio %.4g: widening FWHM bracket to [%.4g, %.4g]",
                               ratio, fwhm_lo, fwhm_hi)
    except (SourceDesignError, ValueError) as exc:
        logger.error("❌ ratio %s failed: %s", ratio, exc)
        return _failed_record(float(ratio), f"{type(exc).__name__}: {exc}")


def sweep_ratio(ratios: Sequence[float], tol: float = DEFAULT_TOL,
                g_p_over_opt: float = 1.0, g_is_over_opt: float = 1.0,
                base_n: int = DEFAULT_GRID_POINTS,
                halfwidth_factor: float = DEFAULT_HALFWIDTH_FACTOR,
                max_n: int = MAX_GRID_POINTS,
                max_workers: int = 1) -> List[OptimizationRecord]:
    """optimize_ratio for every ratio; results keep the input order"""

    def run(ratio: float) -> OptimizationRecord:
        return optimize_ratio(ratio, tol, g_p_over_opt, g_is_over_opt, base_n, halfwidth_factor, max_n)

    if max_workers <= 1:
        return [run(r) for r in ratios]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run, ratios))
