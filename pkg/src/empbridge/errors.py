"""Exception hierarchy shared across the package.

Every error raised deliberately by this package derives from
:class:`EmpbridgeError`, so callers can catch one type at the boundary.
Errors that signal invalid user-supplied values also derive from
:class:`ValueError` to stay friendly to generic handling.
"""

from __future__ import annotations


class EmpbridgeError(Exception):
    """Base class for all package errors."""


class DomainError(EmpbridgeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(EmpbridgeError, ValueError):
    """A configuration value, file, or flag combination is invalid."""


class NumericError(EmpbridgeError, ArithmeticError):
    """A numerical routine failed to reach its accuracy contract."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class DegenerateDesignError(EmpbridgeError, ValueError):
    """The regressor values are all equal, so the slope is undefined."""


class DegenerateBridgeError(EmpbridgeError, ValueError):
    """The residual variance estimate is zero, so the bridge is undefined."""


class ChainValidationError(EmpbridgeError, ValueError):
    """A transition matrix failed validation."""


class NonStochasticRowError(ChainValidationError):
    """Some rows are not probability vectors."""

    def __init__(self, rows: list[int]):
        self.rows = rows
        super().__init__(
            "rows %s are not probability vectors (entries in [0, 1] summing to 1)"
            % rows
        )


class ReducibleChainError(ChainValidationError):
    """The chain is not irreducible."""

    def __init__(self, states: list[int]):
        self.states = states
        super().__init__(
            "chain is reducible: states %s do not communicate with state 1" % states
        )


class PeriodicChainError(ChainValidationError):
    """The chain is irreducible but periodic."""

    def __init__(self, period: int):
        self.period = period
        super().__init__("chain is periodic with period %d" % period)
