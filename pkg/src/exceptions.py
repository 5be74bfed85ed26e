"""Exception taxonomy for blowuplab.

Every error raised by the library derives from :class:`BlowupLabError` and
from the builtin it specializes, so callers can catch either. The CLI maps
each family to a stable exit code via :attr:`BlowupLabError.exit_code`.
"""
from typing import List, Optional


class BlowupLabError(Exception):
    """Base class for all library errors."""

    exit_code: int = 1


class ConfigError(BlowupLabError, ValueError):
    """Invalid flags, malformed or inconsistent configuration."""

    exit_code = 2


class SpecialFunctionDomainError(BlowupLabError, ValueError):
    """Argument outside the supported range of a special function."""

    exit_code = 2


class GeometryError(BlowupLabError, ValueError):
    """Degenerate domain profile or failed boundary chart."""

    exit_code = 2


class SingularPointError(BlowupLabError, ValueError):
    """Field evaluation requested at (or within 1e-14 of) a concentration point."""

    exit_code = 2


class FitError(BlowupLabError, ValueError):
    """Regression could not be carried out (rank deficiency, too few samples)."""

    exit_code = 2


class QuadratureError(BlowupLabError, RuntimeError):
    """One or more integrals failed to converge within the evaluation budget."""

    exit_code = 3

    def __init__(self, message: str, failed: Optional[List[str]] = None):
        self.failed = list(failed or [])
        if self.failed:
            message = f"{message}: {', '.join(self.failed)}"
        super().__init__(message)


class ExpansionVerificationError(BlowupLabError, RuntimeError):
    """Fitted expansion has the wrong sign structure or poor goodness of fit."""

    exit_code = 4


class HypothesisError(BlowupLabError, RuntimeError):
    """Fewer than two strict curvature maxima with positive mean curvature."""

    exit_code = 5


class InvariantViolation(BlowupLabError, AssertionError):
    """A verification suite found a failing invariant."""

    exit_code = 1


class UnderflowWarning(RuntimeWarning):
    """K1 underflows to zero; the value is returned as an exact flagged zero."""
