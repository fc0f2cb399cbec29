"""Exception hierarchy shared by all modules.

Each class carries an ``exit_code`` used by the command-line front end.
"""

from __future__ import annotations


class CatalyticError(Exception):
    exit_code = 1


class InternalError(CatalyticError):
    """An internal consistency assertion failed."""

    exit_code = 1


class ValidationError(CatalyticError):
    exit_code = 2

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class TrivialSystemError(ValidationError):
    """All step polynomials vanish, so there is nothing to compile."""


class InvalidQueryError(ValidationError):
    pass


class OrderMismatchError(CatalyticError):
    exit_code = 1


class DivergenceError(CatalyticError):
    exit_code = 3

    def __init__(self, message: str, cycle: tuple = ()):
        self.cycle = tuple(cycle)
        super().__init__(message)


class ClosureError(InternalError):
    def __init__(self, message: str, index=None):
        self.index = index
        super().__init__(message)


class MonotonicityError(InternalError):
    pass


class CheckMismatchError(CatalyticError):
    exit_code = 4


class AnalysisError(CatalyticError):
    exit_code = 5


class UnsupportedCaseError(AnalysisError):
    pass
