"""
Scalar Functions Module - Gamma and Lambert W

Handles:
- ln Gamma(x) for x > 0
- The scaled gamma function Gamma*(x) and its Stirling series
- Real branches of the Lambert W function (Halley iteration)
"""

import logging
import math
from typing import Literal

from scipy.special import gammaln

from modules.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)


Branch = Literal["principal", "lower"]

_INV_E = math.exp(-1.0)
_EPS = 2.220446049250313e-16

# Stirling series of ln Gamma*(x): B_2k / (2k (2k-1) x^(2k-1)), k = 1..8
_LN_GAMMA_STAR = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_STIRLING_THRESHOLD = 10.0

# Gamma*(x) ~ 1 + 1/(12x) + 1/(288x^2) - 139/(51840x^3) - 571/(2488320x^4)
_GAMMA_STAR_SERIES = (1.0, 1.0 / 12.0, 1.0 / 288.0, -139.0 / 51840.0, -571.0 / 2488320.0)

# W = -1 + p - p^2/3 + ... with p = +-sqrt(2(1 + e x)); minus sign on the lower branch
_BRANCH_POINT_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
    226287557.0 / 37623398400.0,
)
_BRANCH_SWITCH = 1e-4
_HALLEY_MAX_ITER = 100


def _check_positive(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} requires a finite x > 0, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    x = _check_positive(x, "log_gamma")
    return float(gammaln(x))


def log_gamma_star(x: float) -> float:
    """
    Natural log of the scaled gamma function.

    Gamma*(x) = e^x x^(-x) sqrt(x / (2 pi)) Gamma(x). For x >= 10 the Stirling
    series is summed directly so ln Gamma(x) and x ln x never cancel.
    """
    x = _check_positive(x, "gamma_star")
    if x >= _STIRLING_THRESHOLD:
        inv = 1.0 / x
        inv2 = inv * inv
        total = 0.0
        for coeff in reversed(_LN_GAMMA_STAR):
            total = total * inv2 + coeff
        return total * inv
    return x - x * math.log(x) + 0.5 * math.log(x / (2.0 * math.pi)) + log_gamma(x)


def gamma_star(x: float) -> float:
    """Scaled gamma function Gamma*(x), tending to 1 as x grows."""
    return math.exp(log_gamma_star(x))


def gamma_star_series(x: float, terms: int = 3) -> float:
    """Partial sum of the asymptotic series of Gamma*(x) (at most 5 terms)."""
    x = _check_positive(x, "gamma_star_series")
    if not 1 <= terms <= len(_GAMMA_STAR_SERIES):
        raise DomainError(f"gamma_star_series supports 1..{len(_GAMMA_STAR_SERIES)} terms")
    inv = 1.0 / x
    return sum(c * inv**k for k, c in enumerate(_GAMMA_STAR_SERIES[:terms]))


def _branch_point_value(branch: Branch, q: float) -> float:
    p = math.sqrt(2.0 * q)
    if branch == "lower":
        p = -p
    total = 0.0
    for coeff in reversed(_BRANCH_POINT_SERIES):
        total = total * p + coeff
    return total


def _initial_guess(branch: Branch, x: float, q: float) -> float:
    if branch == "principal":
        if x <= 1.5 - _INV_E:
            return math.sqrt(2.0 * q) - 1.0
        l1 = math.log(x)
        return l1 - math.log(l1)
    if q < 0.5:
        p = -math.sqrt(2.0 * q)
        return -1.0 + p - p * p / 3.0
    l1 = math.log(-x)
    l2 = math.log(-l1)
    return l1 - l2 + l2 / l1


def lambert_w(branch: Branch, x: float) -> float:
    """
    Real Lambert W, the solution w of w e^w = x.

    Args:
        branch: "principal" (w >= -1, x >= -1/e) or "lower" (w <= -1, -1/e <= x < 0)
        x: Argument

    Returns:
        w with |w e^w - x| <= 1e-14 max(1, |x|)
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"lambert_w requires a finite argument, got {x!r}")
    if branch not in ("principal", "lower"):
        raise DomainError(f"Unknown Lambert W branch: {branch!r}")

    if x < -_INV_E:
        if -_INV_E - x > 4.0 * _EPS * _INV_E:
            raise DomainError(f"lambert_w({branch}) undefined for x < -1/e, got {x!r}")
        x = -_INV_E
    if branch == "lower" and x >= 0.0:
        raise DomainError(f"lambert_w(lower) requires -1/e <= x < 0, got {x!r}")
    if branch == "principal" and x == 0.0:
        return 0.0

    q = max(0.0, 1.0 + math.e * x)
    if q < _BRANCH_SWITCH:
        return _branch_point_value(branch, q)

    w = _initial_guess(branch, x, q)
    tol = 0.25e-14 * max(1.0, abs(x))
    for iteration in range(_HALLEY_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol:
            return w
        w1 = w + 1.0
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if abs(dw) <= 4.0 * _EPS * (1.0 + abs(w)):
            logger.debug(f"  [LAMBERT] {branch} converged in {iteration + 1} steps")
            return w
    raise ConvergenceError(f"lambert_w({branch}, {x!r}) did not converge in {_HALLEY_MAX_ITER} steps")
