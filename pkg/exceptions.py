"""
Error types for the coupled-ring source designer
"""

from typing import Any, Optional


class SourceDesignError(Exception):
    """Base class for every error raised by the designer"""


class NonPositiveRate(SourceDesignError, ValueError):
    """A coupling rate or pump variance is zero or negative"""


class BadGridSpec(SourceDesignError, ValueError):
    """A frequency grid cannot be built from the requested extent/count"""


class UnsupportedOrder(SourceDesignError, ValueError):
    """Phase derivative requested for an order outside {2, 3, 4, 5}"""


class CarrierMismatch(SourceDesignError, ValueError):
    """Pump carrier is not centred between the idler and signal modes"""


class DegenerateKernel(SourceDesignError, ArithmeticError):
    """The joint spectral amplitude is identically zero"""


class NotNormalized(SourceDesignError, ValueError):
    """Schmidt coefficients do not sum to one"""


class NoConvergence(SourceDesignError):
    """Grid refinement hit the resolution cap before reaching tolerance"""

    def __init__(self, message: str, best: Any, error: float, n_points: int):
        super().__init__(message)
        self.best = best
        self.error = error
        self.n_points = n_points


class BadBracket(SourceDesignError):
    """Pump-width bracket does not enclose the Schmidt-number minimum"""

    def __init__(self, message: str, best: Optional[Any] = None):
        super().__init__(message)
        self.best = best


class ConfigError(SourceDesignError):
    """Run configuration is unusable"""


class ParseError(ConfigError):
    """Run configuration document is syntactically broken"""


class UnknownKey(ConfigError):
    """Run configuration contains a key the designer does not know"""
