"""Exception types shared across the package."""

from __future__ import annotations

from typing import Any


class FeigenbaumError(Exception):
    """Base class for all errors raised by this package."""


class NumericalError(FeigenbaumError, ArithmeticError):
    """A numerical procedure failed (singular matrix, breakdown, ...)."""


class SingularMatrixError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    """An iteration hit its cap or stalled.

    ``best`` carries the best iterate found so far, ``info`` any diagnostics
    (iteration count, residual, agreement digits) useful to the caller.
    """

    def __init__(self, message: str, best: Any = None, **info: Any) -> None:
        super().__init__(message)
        self.best = best
        self.info = info


class CheckpointError(FeigenbaumError, OSError):
    pass
