"""
Errors Module - Exception Hierarchy

Every failure raised by the numerical modules derives from KummerError so the
agent layer can turn it into a status dictionary and the CLI into an exit code.
"""


class KummerError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DomainError(KummerError, ValueError):
    """Argument outside the domain of an operation or case."""

    exit_code = 2


class OrderOverflowError(DomainError):
    """Requested Taylor order or term count above the supported cap."""


class ConvergenceError(KummerError, ArithmeticError):
    """An iterative solver exceeded its iteration cap."""

    exit_code = 3


class OracleError(ConvergenceError):
    """High-precision reference evaluation failed."""


class QuadratureError(OracleError):
    """Quadrature did not reach the requested tolerance."""
