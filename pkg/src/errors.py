"""
Exception hierarchy for the calibration toolkit.

Every failure raised by the library derives from ``CalibrationError`` so the
CLI can map estimator failures to a single exit code. Argument-level
precondition failures additionally subclass ``ValueError``.
"""

from typing import Any, Optional


class CalibrationError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CalibrationError, ValueError):
    """Invalid configuration value (alpha, M, J, rho, seed, ...)."""


class MissingOracle(CalibrationError):
    """Model has no exact posterior at the requested dataset."""


class SimulatorFailure(CalibrationError):
    """A model callback raised while generating replicate ``index``."""

    def __init__(self, index: int, cause: BaseException):
        self.index = index
        self.cause = cause
        super().__init__(f"replicate {index} failed: {type(cause).__name__}: {cause}")


class WindowTimeout(CalibrationError):
    """
    Importance sampler hit its proposal cap before filling the bank.

    The partial bank (and its estimate, if any replicate was accepted) is
    attached so callers can still inspect or persist it.
    """

    def __init__(self, message: str, bank: Any = None, estimate: Any = None):
        self.bank = bank
        self.estimate = estimate
        super().__init__(message)


class DegenerateWeights(CalibrationError):
    """Importance weights sum to zero or contain a non-finite value."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


class SeparationError(CalibrationError):
    """Logistic fit is separated or IRLS diverged."""


class InsufficientSamples(CalibrationError, ValueError):
    """Too few posterior draws for the requested credible level."""


class NonIntegrable(CalibrationError, ValueError):
    """Grid density has zero or non-finite total mass."""


class EmptySample(CalibrationError, ValueError):
    """An empirical CDF was requested from an empty sample."""


class GridMismatch(CalibrationError, ValueError):
    """Two grid CDFs do not share the same grid."""


class UnrankedLabel(CalibrationError, KeyError):
    """A label with positive mass is missing from the reference order."""


class SizeLimit(CalibrationError, ValueError):
    """Lattice too large for the exact transfer matrix."""


class DegenerateDensity(CalibrationError):
    """All grid masses underflowed when exponentiating a log density."""


class TargetUnreachable(CalibrationError, ValueError):
    """Requested coverage exceeds the maximum of the estimated curve."""


class AllZeroWeights(CalibrationError, ValueError):
    """ESS requested for a weight vector with no positive entry."""


class ExtrapolationWarning(UserWarning):
    """Prediction point lies outside the training summaries' bounding box."""
