"""Exception hierarchy shared by every probwave module."""


class ProbwaveError(Exception):
    """Base class for all domain and data errors raised by probwave."""


class DomainError(ProbwaveError, ValueError):
    """Argument outside the domain where a function is defined."""


class OutOfRangeError(DomainError):
    """Argument outside the validity window of an implementation."""


class BracketError(ProbwaveError, ValueError):
    """Root-finding interval does not straddle a sign change."""


class SizeError(ProbwaveError, ValueError):
    """Input sequence too short for the requested operation."""


class DegenerateError(ProbwaveError, ValueError):
    """Input carries no usable mass (all-zero density, empty support, ...)."""


class SolverError(ProbwaveError, ArithmeticError):
    """ODE integration failed.

    Attributes
    ----------
    location : float or None
        Coordinate at which the trajectory stopped being finite.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SpectrumError(ProbwaveError):
    """An eigenvalue could not be bracketed inside the energy scan."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ParseError(ProbwaveError, ValueError):
    """Malformed input row; carries the 1-based line number and field."""

    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field


class TradeValueError(ParseError):
    """Well-formed row with a non-positive price or volume."""


class EmptyWindowError(ProbwaveError, ValueError):
    """No trades fall inside the requested time window."""
