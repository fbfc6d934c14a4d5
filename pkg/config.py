"""
Run configuration for the command-line front end.

A configuration document is a dotenv-style key=value file:

    # ratio 6.6 at the published optimal width
    kappa_p_ratio=6.6
    pump_fwhm_over_kappa_p=0.45

Everything is dimensionless with kappa_is = 1. Physical-unit keys
(kappa_is, kappa_p, pump_fwhm, omega0_*_abs) are accepted as a convenience
and normalized immediately; they never appear in serialized output.
"""

import io
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

from dotenv.parser import parse_stream
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from core import PumpSpec, ResonatorParams, make_grid
from exceptions import ConfigError, NonPositiveRate, ParseError, UnknownKey
from transfer import coupled_params

logger = logging.getLogger(__name__)

PHYSICAL_KEYS = ("kappa_is", "kappa_p", "pump_fwhm", "omega0_p_abs", "omega0_i_abs", "omega0_s_abs")


# ============================================================================
# CONFIG MODEL
# ============================================================================

class RunConfig(BaseModel):
    """Dimensionless run configuration (kappa_is = 1)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kappa_p_ratio: float = 1.0
    g_p_over_opt: float = 1.0
    g_is_over_opt: float = 1.0
    pump_fwhm_over_kappa_p: Optional[float] = None
    grid_n: int = 513
    grid_halfwidth_factor: float = 8.0
    tol_k: float = 1e-4
    ratios: Tuple[float, ...] = (1.0, 6.6, 10.0)
    delay_halfwidth: float = 0.5   # kappa_p units
    flatness_window: float = 0.1   # kappa_p units
    max_n: int = 8193
    omega0_p: float = 0.0
    omega0_i: float = 0.0
    omega0_s: float = 0.0
    heatmap: bool = False

    @field_validator("ratios", mode="before")
    @classmethod
    def split_ratios(cls, value):
        if isinstance(value, str):
            return tuple(float(item) for item in value.split(",") if item.strip())
        return value

    @property
    def params(self) -> ResonatorParams:
        return coupled_params(
            self.kappa_p_ratio, 1.0, self.g_p_over_opt, self.g_is_over_opt,
            self.omega0_p, self.omega0_i, self.omega0_s,
        )

    @property
    def pump(self) -> Optional[PumpSpec]:
        if self.pump_fwhm_over_kappa_p is None:
            return None
        return PumpSpec.from_fwhm(self.pump_fwhm_over_kappa_p * self.kappa_p_ratio, self.omega0_p)

    def validate_values(self) -> "RunConfig":
        """Raise the designer's own errors for values the model alone accepts"""
        _ = self.params, self.pump
        make_grid(0.0, self.grid_halfwidth_factor, self.grid_n)
        for name in ("tol_k", "delay_halfwidth", "flatness_window"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        return self


# ============================================================================
# PARSING AND SERIALIZATION
# ============================================================================

def _read_pairs(text: str) -> Dict[str, str]:
    pairs: Dict[str, str] = {}
    for binding in parse_stream(io.StringIO(text)):
        if binding.error:
            raise ParseError(f"cannot parse line {binding.original.line}: {binding.original.string.strip()!r}")
        if binding.key is None:
            continue
        if binding.value is None:
            raise ParseError(f"key {binding.key!r} on line {binding.original.line} has no value")
        pairs[binding.key.strip().lower()] = binding.value.strip()
    return pairs


def _positive(pairs: Dict[str, str], key: str) -> float:
    try:
        value = float(pairs.pop(key))
    except ValueError as exc:
        raise ParseError(f"{key} must be a number: {exc}") from exc
    if not value > 0:
        raise NonPositiveRate(f"{key} must be positive, got {value}")
    return value


def _normalize_physical(pairs: Dict[str, str]) -> Dict[str, str]:
    if not any(key in pairs for key in PHYSICAL_KEYS):
        return pairs
    pairs = dict(pairs)
    kappa_is = _positive(pairs, "kappa_is") if "kappa_is" in pairs else 1.0

    if "kappa_p" in pairs:
        if "kappa_p_ratio" in pairs:
            raise ConfigError("give either kappa_p or kappa_p_ratio, not both")
        pairs["kappa_p_ratio"] = repr(_positive(pairs, "kappa_p") / kappa_is)

    if "pump_fwhm" in pairs:
        if "pump_fwhm_over_kappa_p" in pairs:
            raise ConfigError("give either pump_fwhm or pump_fwhm_over_kappa_p, not both")
        kappa_p = float(pairs.get("kappa_p_ratio", 1.0)) * kappa_is
        pairs["pump_fwhm_over_kappa_p"] = repr(_positive(pairs, "pump_fwhm") / kappa_p)

    for channel in ("p", "i", "s"):
        key = f"omega0_{channel}_abs"
        if key in pairs:
            pairs[f"omega0_{channel}"] = repr(float(pairs.pop(key)) / kappa_is)
    return pairs


def parse_config(text: str) -> RunConfig:
    """Parse and validate a key=value configuration document"""
    pairs = _normalize_physical(_read_pairs(text))

    known = set(RunConfig.model_fields)
    unknown = sorted(set(pairs) - known)
    if unknown:
        raise UnknownKey(f"unknown configuration key(s): {', '.join(unknown)}")

    try:
        config = RunConfig(**pairs)
    except ValidationError as exc:
        raise ParseError(f"invalid configuration value: {exc}") from exc
    return config.validate_values()


def load_config(path: Optional[Path]) -> RunConfig:
    if path is None:
        return RunConfig().validate_values()
    text = Path(path).read_text(encoding="utf-8")
    logger.info("Loaded configuration from %s", path)
    return parse_config(text)


def serialize_config(config: RunConfig) -> str:
    """Normalized keys in field order, floats written with repr for exact round-trips"""
    lines = []
    for name, value in config.model_dump().items():
        if value is None:
            continue
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (tuple, list)):
            text = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{name}={text}")
    return "\n".join(lines) + "\n"
