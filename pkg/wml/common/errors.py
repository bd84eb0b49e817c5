"""
Exception hierarchy for wave matrix Lindbladization.

Every error carries an actionable message: what failed and how to fix it.
The CLI maps each class onto a process exit code.
"""


class WMLError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ShapeError(WMLError):
    """Operator shapes or subsystem dimensions do not line up."""

    exit_code = 2


class SizeError(WMLError):
    """A dense object would exceed the configured entry limit."""

    exit_code = 2


class SpecError(WMLError):
    """A Lindbladian, linear or polynomial spec is invalid."""

    exit_code = 2


class ArgumentError(WMLError, ValueError):
    """A scalar argument is outside its allowed range."""

    exit_code = 2


class ModeError(WMLError):
    """Requested operation is not available in the configured mode."""

    exit_code = 2


class ConfigError(WMLError):
    """Experiment config file could not be parsed or validated."""

    exit_code = 2


class NumericalIntegrityError(WMLError):
    """A computed state or channel violates its invariants beyond tolerance."""

    exit_code = 3


class StepSizeError(NumericalIntegrityError):
    """Truncated series diverged; more substeps are needed."""

    exit_code = 3


EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_LEMMA_FAILURE = 4
