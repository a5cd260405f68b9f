"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class RStatsError(Exception):
    """Base class for all errors raised by rstats."""


class InvalidInputError(RStatsError, ValueError):
    """Input violates a documented precondition (empty, NaN, wrong length...)."""


class DegenerateInputError(InvalidInputError):
    """Input is well-formed but carries no information for the statistic."""


class NullFormatError(RStatsError):
    """A null-table file is corrupt, truncated or has an unknown version."""


class NullMismatchError(RStatsError):
    """A null table was requested for a different variant, length or generator."""


class FitConvergenceError(RStatsError):
    """The sigma_N calibration fit did not converge.

    The raw measurement grid is attached so callers can still inspect it.
    """

    def __init__(self, message: str, grid=None):
        super().__init__(message)
        self.grid = grid
