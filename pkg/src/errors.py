"""Exception hierarchy shared by the model, solvers, PDE and simulator.

Configuration problems derive from ValueError and numerical failures from
RuntimeError, so callers catching the builtin types keep working.
"""

from typing import Any, Dict, List, Optional

# CLI exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_PROPERTY = 4


class ModelError(ValueError):
    """Malformed or out-of-range model configuration."""


class OutOfRangeError(ModelError):
    """A time, state or control query outside its domain."""


class PreconditionError(ModelError):
    """An operation was called without its precondition holding."""


class NumericalError(RuntimeError):
    """Base class for numerical failures."""


class DivergentMomentError(NumericalError):
    """An exponentially tilted claim moment is infinite or overflows."""

    def __init__(self, distribution: str, tilt: float, order: int, reason: str):
        self.distribution = distribution
        self.tilt = tilt
        self.order = order
        super().__init__(
            f"Divergent moment E[Z^{order} exp({tilt:.6g} Z)] for {distribution}: {reason}"
        )


class BracketError(NumericalError):
    """No sign change found while expanding a root bracket."""


class ConvergenceError(NumericalError):
    """Iteration limit reached before the residual tolerance."""


class PositivityError(NumericalError):
    """A PDE solution lost positivity."""


class DominanceError(NumericalError):
    """A simulated intensity exceeded its declared bound."""


class ValidationFailure(RuntimeError):
    """Raised by the runner when a validation report has hard failures."""

    def __init__(self, report: Any):
        self.report = report
        names = ", ".join(c.name for c in report.failures())
        super().__init__(f"Validation failed for {report.subject}: {names}")


class PropertyViolation(RuntimeError):
    """Raised when verification finds violated properties."""

    def __init__(self, violations: List[Dict[str, Any]], context: Optional[str] = None):
        self.violations = violations
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}{len(violations)} property violation(s)")


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, PropertyViolation):
        return EXIT_PROPERTY
    if isinstance(error, (ValidationFailure, ModelError)):
        return EXIT_VALIDATION
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    return 1
