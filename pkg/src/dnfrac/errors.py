"""Exception types shared across the package."""

from __future__ import annotations


class NonConvergence(ArithmeticError):
    """A series did not reach its tail bound within the allowed number of terms."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class QuadratureError(ArithmeticError):
    """A grid is too coarse for the requested product integration."""


class SolvabilityError(ValueError):
    """A problem fails the existence hypotheses and no override was given."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
