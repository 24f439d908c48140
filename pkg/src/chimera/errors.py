"""Typed errors raised across the package."""


class ChimeraError(Exception):
    """Base class for all package errors."""


class DegenerateScaleError(ChimeraError):
    """Running-max scaling requested on an all-zero series."""


class AlignmentError(ChimeraError):
    """Daily vector length is not a whole number of weeks."""


class MonotonicityError(ChimeraError):
    """Quantile values decrease with increasing probability level."""


class WeightSumError(ChimeraError):
    """Pool weights are negative or do not sum to one."""


class InsufficientHistoryError(ChimeraError):
    """Not enough overlapping weeks of surveillance to fit weights."""


class NonPositiveScaleError(ChimeraError):
    """A running-max scale c must be strictly positive."""


class InitializationError(ChimeraError):
    """Sampler initialised at a point with non-finite log density."""


class UndefinedReferenceError(ChimeraError):
    """Relative score undefined: reference score is zero, evaluated score is not."""


class IntervalError(ChimeraError):
    """Interval score called with lower > upper or alpha outside (0,1)."""


class LevelSetError(ChimeraError):
    """Quantile level set lacks a median or contains unpaired levels."""


class DegenerateSampleError(ChimeraError):
    """Statistical test called on a sample that is too small or has zero variance."""


class RankDeficiencyError(ChimeraError):
    """Regression design matrix is not full rank."""


class ValidationError(ChimeraError):
    """Input file contains an invalid record."""


class GapError(ValidationError):
    """Surveillance series has missing weeks."""

    def __init__(self, location, missing_weeks):
        self.location = location
        self.missing_weeks = list(missing_weeks)
        super().__init__(
            f"{location}: missing weeks {', '.join(str(w) for w in self.missing_weeks)}"
        )


class TargetError(ValidationError):
    """Unknown forecast target string."""


class SchemaError(ChimeraError):
    """Persisted artifact does not match the expected schema."""


class ConfigError(ChimeraError):
    """Run configuration is inconsistent."""
