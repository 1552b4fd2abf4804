"""
Oracle Module - High-Precision Reference Values

Handles:
- M(a, b, z) from its defining power series
- U(a, b, z) by tanh-sinh quadrature of the Laplace integral
- U(a, b+1, z) for b >= a through the connection formula with two M values

Every call builds its own mpmath context, so precision is never global state.
"""

import logging
import math
from typing import Any, Dict, Optional, Tuple

import mpmath
from pydantic import BaseModel, ConfigDict

from modules.errors import DomainError, OracleError, QuadratureError
from modules.regimes import Function

logger = logging.getLogger(__name__)


MIN_PRECISION = 30
_GUARD_DIGITS = 15
_SERIES_MAX_TERMS = 200_000
_QUAD_TOLERANCE_DIGITS = 5
_CONNECTION_TOLERANCE_DIGITS = 10
_CANCELLATION_MARGIN = 15


class OracleResult(BaseModel):
    """An extended-precision reference value with its provenance."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: Any
    digits: int
    route: str
    perturbation: float = 0.0

    @property
    def log_value(self) -> float:
        """Natural log of the value as a float; never overflows."""
        return float(self.value.context.ln(self.value))

    def to_record(self) -> Dict[str, Any]:
        return {
            "value": mpmath.nstr(self.value, self.digits),
            "log_value": self.log_value,
            "digits": self.digits,
            "route": self.route,
            "perturbation": self.perturbation,
        }


def _context(P: int, extra: int = 0) -> mpmath.MPContext:
    if P < MIN_PRECISION:
        raise DomainError(f"Oracle precision must be >= {MIN_PRECISION} digits, got {P}")
    mp = mpmath.MPContext()
    mp.dps = P + _GUARD_DIGITS + extra
    return mp


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value) or value <= 0.0:
            raise DomainError(f"{name} must be finite and > 0, got {value!r}")


def oracle_M(a: float, b: float, z: float, P: int = 60) -> OracleResult:
    """
    M(a, b, z) = sum (a)_n / (b)_n z^n / n! at P digits.

    All terms are positive for a, b, z > 0, so the partial sums never cancel.
    """
    _check_positive(a=a, b=b, z=z)
    mp = _context(P)
    a_, b_, z_ = mp.mpf(a), mp.mpf(b), mp.mpf(z)
    tol = mp.mpf(10) ** (-P - 10)
    term = mp.one
    total = mp.one
    for n in range(_SERIES_MAX_TERMS):
        term *= (a_ + n) / (b_ + n) * z_ / (n + 1)
        total += term
        decreasing = (a_ + n + 1) * z_ < (b_ + n + 1) * (n + 2)
        if decreasing and term < tol * total:
            logger.debug(f"  [ORACLE] M series converged after {n + 1} terms")
            return OracleResult(value=total, digits=P - 1, route="series")
    raise OracleError(f"M({a}, {b}, {z}) series did not converge in {_SERIES_MAX_TERMS} terms")


def _peak(mp: mpmath.MPContext, alpha: Any, beta: Any, z: Any) -> Tuple[Any, Any]:
    """Maximum t* of e^(-zt) t^(alpha-1) (1+t)^(beta-alpha-1) and its width."""
    e1 = alpha - 1
    e2 = beta - alpha - 1
    if e1 <= 0:
        return mp.zero, 1 / (z + abs(e2))
    B = z - beta + 2
    root = mp.sqrt(B * B + 4 * z * e1)
    # z t^2 + B t - e1 = 0, positive root
    peak = 2 * e1 / (B + root) if B > 0 else (root - B) / (2 * z)
    curvature = e1 / peak**2 + e2 / (1 + peak) ** 2
    return peak, 1 / mp.sqrt(abs(curvature))


def laplace_u(alpha: float, beta: float, z: float, P: int = 60, max_level: int = 12) -> OracleResult:
    """
    U(alpha, beta, z) = 1/Gamma(alpha) int_0^inf e^(-zt) t^(alpha-1) (1+t)^(beta-alpha-1) dt.

    Args:
        alpha: First parameter, > 0
        beta: Second parameter, any real
        z: Argument, > 0
        P: Working precision in decimal digits
        max_level: Maximum tanh-sinh degree

    Returns:
        OracleResult on the quadrature route
    """
    _check_positive(alpha=alpha, z=z)
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta!r}")
    mp = _context(P)
    al, be, z_ = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
    e1 = al - 1
    e2 = be - al - 1

    def h(t: Any) -> Any:
        return -z_ * t + e1 * mp.ln(t) + e2 * mp.log1p(t)

    peak, width = _peak(mp, al, be, z_)
    if peak > 0:
        h_peak = h(peak)
        offsets = (-6, -2, 0, 2, 6)
        inner = [peak + k * width for k in offsets if peak + k * width > 0]
    else:
        h_peak = mp.zero
        inner = [2 * width, 6 * width, 20 * width]
    points = [mp.zero] + inner + [mp.inf]

    integral, err = mp.quad(lambda t: mp.exp(h(t) - h_peak), points, error=True, maxdegree=max_level)
    if not integral > 0 or err > mp.mpf(10) ** (_QUAD_TOLERANCE_DIGITS - P) * integral:
        raise QuadratureError(
            f"U({alpha}, {beta}, {z}) quadrature error {mpmath.nstr(err, 3)} above tolerance"
        )
    value = mp.exp(h_peak + mp.ln(integral) - mp.loggamma(al))
    logger.debug(f"  [ORACLE] laplace_u peak={mpmath.nstr(peak, 8)} width={mpmath.nstr(width, 8)}")
    return OracleResult(value=value, digits=P - _QUAD_TOLERANCE_DIGITS, route="quadrature")


def _connection_terms(mp: mpmath.MPContext, a: Any, b: Any, z: Any) -> Tuple[Any, Any]:
    c = b + 1
    first = mp.gamma(1 - c) * mp.rgamma(a - c + 1) * mp.hyp1f1(a, c, z)
    second = mp.gamma(c - 1) * mp.rgamma(a) * z ** (1 - c) * mp.hyp1f1(a - c + 1, 2 - c, z)
    return first, second


def _lost_digits(mp: mpmath.MPContext, first: Any, second: Any) -> float:
    total = first + second
    if total == 0:
        return math.inf
    largest = max(abs(first), abs(second))
    if largest == 0:
        return 0.0
    return float(mp.log10(largest / abs(total)))


def _connection_value(a: float, b: Any, z: float, P: int, b_offset: Any = None) -> Any:
    """U(a, b+1, z) from the connection formula with adaptive guard digits."""
    extra = 0
    for _ in range(2):
        mp = _context(P, extra)
        b_ = mp.mpf(b) if b_offset is None else mp.mpf(b) + mp.mpf(b_offset)
        first, second = _connection_terms(mp, mp.mpf(a), b_, mp.mpf(z))
        lost = _lost_digits(mp, first, second)
        if lost > P - _CANCELLATION_MARGIN:
            raise OracleError(
                f"Cancellation alarm for U({a}, {b}+1, {z}): connection terms agree to {lost:.1f} digits"
            )
        if lost <= _GUARD_DIGITS - 5:
            return first + second
        extra = int(math.ceil(lost)) + 5
    return first + second


def oracle_U(
    a: float,
    b: float,
    z: float,
    P: int = 60,
    max_level: int = 12,
    route: Optional[str] = None,
) -> OracleResult:
    """
    U(a, b+1, z) at P digits.

    Route "quadrature" (default for b < a) uses U(a, b+1, z) = z^(-b) U(a-b, 1-b, z)
    and laplace_u. Route "connection" (default for b >= a) combines two M values;
    an integer b is replaced by the average of b -/+ 10^(-P/2).
    """
    _check_positive(a=a, b=b, z=z)
    if route is None:
        route = "quadrature" if b < a else "connection"

    if route == "quadrature":
        if not b < a:
            raise DomainError(f"Quadrature route needs b < a, got a={a}, b={b}")
        inner = laplace_u(a - b, 1.0 - b, z, P, max_level)
        mp = inner.value.context
        value = mp.power(mp.mpf(z), -mp.mpf(b)) * inner.value
        return OracleResult(value=value, digits=inner.digits, route="quadrature")

    if route != "connection":
        raise DomainError(f"Unknown oracle route {route!r}")

    if float(b).is_integer():
        mp = _context(P)
        delta = mp.mpf(10) ** (-(P // 2))
        low = _connection_value(a, b, z, P, -delta)
        high = _connection_value(a, b, z, P, delta)
        value = (low + high) / 2
        logger.warning(f"  [WARN] Integer b={b:g}: averaged connection values at b -/+ {mpmath.nstr(delta, 3)}")
        return OracleResult(
            value=value,
            digits=P - _CONNECTION_TOLERANCE_DIGITS,
            route="connection",
            perturbation=float(delta),
        )

    value = _connection_value(a, b, z, P)
    return OracleResult(value=value, digits=P - _CONNECTION_TOLERANCE_DIGITS, route="connection")


def oracle_log(
    fn: Function,
    a: float,
    b: float,
    z: float,
    P: int = 60,
    max_level: int = 12,
) -> float:
    """Natural log of the oracle value of M(a, b, z) or U(a, b+1, z), as a float."""
    if Function(fn) is Function.M:
        return oracle_M(a, b, z, P).log_value
    return oracle_U(a, b, z, P, max_level).log_value


class OracleModule:
    """Configured access to the reference values."""

    def __init__(self, config: Dict[str, Any]):
        """Initialize the oracle with configuration."""
        self.config = config
        self.precision = int(config.get("precision_digits", 60))
        self.max_level = int(config.get("quad_max_level", 12))
        if self.precision < MIN_PRECISION:
            raise DomainError(f"precision_digits must be >= {MIN_PRECISION}, got {self.precision}")
        logger.info(f"  [OK] OracleModule initialized (precision={self.precision}, max_level={self.max_level})")

    def evaluate(
        self,
        fn: Function,
        a: float,
        b: float,
        z: float,
        precision: Optional[int] = None,
        route: Optional[str] = None,
    ) -> OracleResult:
        """
        Reference value of M(a, b, z) or U(a, b+1, z).

        Args:
            fn: Function.M or Function.U
            a, b, z: Parameters, all positive
            precision: Digits, defaults to the configured precision
            route: Forced U route ("quadrature" or "connection")

        Returns:
            OracleResult
        """
        P = precision or self.precision
        logger.info(f"  [ORACLE] {Function(fn).value}({a:g}, {b:g}, {z:g}) at {P} digits")
        if Function(fn) is Function.M:
            return oracle_M(a, b, z, P)
        return oracle_U(a, b, z, P, self.max_level, route)

    def log_value(self, fn: Function, a: float, b: float, z: float, precision: Optional[int] = None) -> float:
        return self.evaluate(fn, a, b, z, precision).log_value
