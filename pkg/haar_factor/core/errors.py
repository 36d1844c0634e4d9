"""
Exception hierarchy shared by the construction pipeline and the command line.
"""

from typing import Any, Dict, List, Optional


class HaarFactorError(Exception):
    """Base class for all errors raised by haar_factor."""

    exit_code = 2


class InvalidIntervalError(HaarFactorError, ValueError):
    """A dyadic interval or generation argument is out of range."""


class DepthBudgetError(HaarFactorError, ValueError):
    """A level or depth exceeds the configured budget."""


class PreconditionError(HaarFactorError, ValueError):
    """An operation was called outside its documented domain."""


class MissingSignError(PreconditionError, KeyError):
    """A sign was requested for an interval that has none."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class InputFormatError(HaarFactorError, ValueError):
    """A JSON payload or command parameter could not be parsed."""


class InfeasibleWithinDepth(HaarFactorError, RuntimeError):
    """
    A finite-budget construction step could not meet its budget.

    The ``report`` dictionary names the failing stage and step, the best value
    that was achieved, the budget it had to meet and a suggested depth.
    """

    exit_code = 3

    def __init__(self, message: str, report: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.report = report or {}


class VerificationFailure(HaarFactorError, RuntimeError):
    """A witness or replayed certificate inequality does not hold."""

    exit_code = 1

    def __init__(self, message: str, failures: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.failures = failures or []
