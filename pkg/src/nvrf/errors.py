"""Exception types shared across the package.

Every error carries the exit code the command line maps it to:
2 validation, 3 I/O, 4 data shape, 5 convergence.
"""

from __future__ import annotations


class SensorError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class ValidationError(SensorError):
    """Invalid parameter value or inconsistent input."""

    exit_code = 2


class IoFailure(SensorError):
    """A file could not be read or written."""

    exit_code = 3


class DataShapeError(SensorError):
    """Input data has the wrong structure for the requested operation."""

    exit_code = 4


class ConvergenceError(SensorError):
    """An iterative numerical procedure failed to converge."""

    exit_code = 5


class FieldValidationError(ValidationError):
    """Aggregate of every field-parameter invariant that failed."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NonPositiveCarrier(ValidationError):
    """Carrier frequency nu_rf must be positive."""


class NegativeTransverse(ValidationError):
    """Transverse amplitude nu_x must be non-negative."""


class ZeroCarrier(ValidationError):
    """Operation undefined at zero carrier frequency."""


class ZeroTransition(ValidationError):
    """Operation undefined at zero transition frequency."""


class NegativeDuration(ValidationError):
    """Event durations and start times must be non-negative."""


class StepTooCoarse(ValidationError):
    """Integration step does not resolve the fastest dynamical frequency."""


class NonUnitaryDrift(ConvergenceError):
    """State norm drifted beyond the unitarity budget during propagation."""


class NonUniformSampling(DataShapeError):
    """Time samples are not uniformly spaced."""


class AmbiguousAssignment(DataShapeError):
    """A spectral peak sits too far from every carrier harmonic."""


class NoConvergence(ConvergenceError):
    """Fit did not converge or failed the residual gate."""


class DegenerateTrace(ValidationError):
    """Trace has too few points to constrain the model."""


class SingularSystem(ValidationError):
    """Linear system for the power separation is singular."""


class NegativeShift(ValidationError):
    """A rate that must be non-negative came out negative."""


class ZeroField(ValidationError):
    """Angle undefined when both field components vanish."""


class FileFormatError(ValidationError):
    """File exists but its content does not match the expected format."""
