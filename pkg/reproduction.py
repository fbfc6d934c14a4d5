"""
Reproduction checks for published design figures
Records computed values against expected bands and summarizes pass/fail
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from utils import format_runtime, format_timestamp, truncate_text, write_json

logger = logging.getLogger(__name__)


# ============================================================================
# CHECK DEFINITIONS
# ============================================================================

@dataclass
class PublishedCheck:
    """A published number with its acceptance band"""
    name: str
    expected: str
    lower: float
    upper: float

    def accepts(self, value: float) -> bool:
        return math.isfinite(value) and self.lower <= value <= self.upper


@dataclass
class CheckOutcome:
    """Result of evaluating one check"""
    name: str
    expected: str
    lower: float
    upper: float
    computed: Optional[float]
    passed: bool
    runtime: float
    timestamp: str
    detail: str = ""


def create_published_checks() -> Dict[str, PublishedCheck]:
    """
    Standard checks run by `reproduce`.

    K(sigma) has no interior minimum for the published ratios, so the optimized
    K is the broadband limit K_inf. Its bands cover both the published value
    and the model's plateau (ratio 1: K_inf ~ 1.079; ratio 6.6: ~ 1.00023).
    """
    checks = [
        PublishedCheck("third_derivative_at_g_opt", "|d3 Arg M| < 1e-6", 0.0, 1e-6),
        PublishedCheck("third_derivative_off_optimum", "min(|d3 Arg M|) at 0.9/1.1 g_opt > 0.1", 0.1, math.inf),
        PublishedCheck("delay_center_matches_slope", "relative error < 1e-6", 0.0, 1e-6),
        PublishedCheck("delay_flatness_ratio", "neighbour deviation / g_opt deviation >= 5", 5.0, math.inf),
        PublishedCheck("k_ratio_1", "K_inf in [1.06, 1.085] (published 1.07)", 1.06, 1.085),
        PublishedCheck("purity_ratio_1", "gamma = 1/K_inf in [0.9216, 0.9434] (published 0.94)", 0.9216, 0.9434),
        PublishedCheck("k_ratio_6.6", "K_inf in [1.0001, 1.0004] (published 1.0003)", 1.0001, 1.0004),
        PublishedCheck("k_ratio_6.6_fixed_fwhm", "K(FWHM 0.45 kappa_p) in [1.0005, 1.001]", 1.0005, 1.001),
        PublishedCheck("k_excess_ratio_6.6_fixed_fwhm", "K(FWHM 0.45 kappa_p) - K_inf in [2e-4, 8e-4]",
                       2e-4, 8e-4),
        PublishedCheck("k_minus_1_ratio_10", "K - 1 = 6e-5", 3e-5, 1.2e-4),
        PublishedCheck("purity_ratio_10", "gamma rounds to 0.9999", 0.99985, 0.99995),
        PublishedCheck("jsi_k_ratio_1", "sidecar K in [1.06, 1.085]", 1.06, 1.085),
        PublishedCheck("jsi_purity_ratio_10", "sidecar gamma rounds to 0.9999", 0.99985, 0.99995),
    ]
    return {check.name: check for check in checks}


# ============================================================================
# CHECK COLLECTOR
# ============================================================================

class CheckCollector:
    """Collects check outcomes and convergence warnings"""

    def __init__(self):
        self.outcomes: List[CheckOutcome] = []
        self.warnings: List[str] = []

    def run(self, check: PublishedCheck, compute: Callable[[], float]) -> CheckOutcome:
        """Evaluate `compute` and record the outcome; errors count as failures"""
        start_time = time.time()
        try:
            value = float(compute())
            outcome = CheckOutcome(
                name=check.name, expected=check.expected, lower=check.lower, upper=check.upper,
                computed=value, passed=check.accepts(value), runtime=time.time() - start_time,
                timestamp=format_timestamp(),
            )
        except Exception as e:
            logger.error("❌ check %s raised %s: %s", check.name, type(e).__name__, e)
            outcome = CheckOutcome(
                name=check.name, expected=check.expected, lower=check.lower, upper=check.upper,
                computed=None, passed=False, runtime=time.time() - start_time,
                timestamp=format_timestamp(), detail=truncate_text(f"{type(e).__name__}: {e}", 300),
            )
        self.record(outcome)
        return outcome

    def record(self, outcome: CheckOutcome):
        self.outcomes.append(outcome)
        mark = "✅" if outcome.passed else "❌"
        logger.info("%s %s: %s (expected %s, %s)", mark, outcome.name, outcome.computed,
                    outcome.expected, format_runtime(outcome.runtime))

    def add_warning(self, message: str):
        logger.warning("⚠️ %s", message)
        self.warnings.append(message)

    def all_passed(self) -> bool:
        return bool(self.outcomes) and all(o.passed for o in self.outcomes)

    def get_success_rate(self) -> float:
        if not self.outcomes:
            return 0.0
        return 100.0 * sum(1 for o in self.outcomes if o.passed) / len(self.outcomes)

    def get_total_runtime(self) -> float:
        return sum(o.runtime for o in self.outcomes)

    def get_summary(self) -> Dict[str, Any]:
        return {
            "total_checks": len(self.outcomes),
            "passed": sum(1 for o in self.outcomes if o.passed),
            "failed": sum(1 for o in self.outcomes if not o.passed),
            "success_rate": self.get_success_rate(),
            "all_passed": self.all_passed(),
            "warnings": len(self.warnings),
            "total_runtime": self.get_total_runtime(),
            "timestamp": format_timestamp(),
        }

    def export_report(self, path: Path, extra: Optional[Dict[str, Any]] = None) -> Path:
        data = {
            "summary": self.get_summary(),
            "checks": [asdict(o) for o in self.outcomes],
            "warnings": list(self.warnings),
        }
        if extra:
            data.update(extra)
        return write_json(path, data)
