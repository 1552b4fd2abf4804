"""
Coefficients Module - Vanishing Saddle Point Coefficient Engine

Handles:
- Reversion of the transformation into the series t(s) about s0
- Taylor coefficients a_m(mu) of the case amplitude about s0
- The recursion c_m^(n+1) = m c_(m+1)^(n) + mu (m+1) c_(m+2)^(n) giving f_n(mu)
- Printed closed forms of the normalized coefficients for n <= 2
- Expansions of the standard Laplace and loop forms for a given amplitude

Series arithmetic runs in mpmath at a working precision that grows with the
order and with -log10(mu); results are rounded to float at the end.
"""

import logging
import math
from functools import lru_cache
from typing import Any, List, Literal, Sequence, Tuple

import mpmath
from pydantic import BaseModel, ConfigDict

from modules.errors import DomainError, OrderOverflowError
from modules.regimes import (
    Function,
    Order,
    Regime,
    SaddleContext,
    exponent_sign,
    log_terms,
    phase_taylor,
    psi_taylor,
    saddle_point,
    weight_factors,
)

logger = logging.getLogger(__name__)


MAX_TAYLOR_ORDER = 12
MAX_TERMS = 6
_BASE_DIGITS = 30

StandardForm = Literal["laplace", "loop"]
Series = List[Any]


class CoefficientTable(BaseModel):
    """Amplitude Taylor coefficients and the derived expansion coefficients."""

    model_config = ConfigDict(frozen=True)

    regime: Regime
    mu: float
    z: float
    a_m: List[float]
    f_n: List[float]
    normalized: List[float]


def _working_digits(mu: float, order: int) -> int:
    loss = max(0.0, -math.log10(mu)) if mu > 0.0 else 0.0
    return _BASE_DIGITS + int(math.ceil((order + 2) * loss))


def _context(mu: float, order: int) -> mpmath.MPContext:
    mp = mpmath.MPContext()
    mp.dps = _working_digits(mu, order)
    return mp


def _mul(a: Series, b: Series, n: int) -> Series:
    out = [a[0] * 0] * (n + 1)
    for i in range(min(len(a), n + 1)):
        if a[i] == 0:
            continue
        for j in range(min(len(b), n + 1 - i)):
            out[i + j] += a[i] * b[j]
    return out


def _inv(a: Series, n: int) -> Series:
    out = [a[0] * 0] * (n + 1)
    out[0] = 1 / a[0]
    for k in range(1, n + 1):
        acc = a[0] * 0
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += a[j] * out[k - j]
        out[k] = -acc * out[0]
    return out


def _exp0(a: Series, n: int) -> Series:
    """exp of a series with zero constant term."""
    out = [a[0] * 0] * (n + 1)
    out[0] = a[0] * 0 + 1
    for k in range(1, n + 1):
        acc = a[0] * 0
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += j * a[j] * out[k - j]
        out[k] = acc / k
    return out


def _compose(outer: Series, inner: Series, n: int) -> Series:
    """sum_j outer[j] inner^j for j >= 1, inner[0] = 0."""
    result = [inner[1] * 0] * (n + 1)
    power = [inner[1] * 0 + 1] + [inner[1] * 0] * n
    for j in range(1, min(len(outer) - 1, n) + 1):
        power = _mul(power, inner, n)
        if outer[j] == 0:
            continue
        for k in range(n + 1):
            result[k] += outer[j] * power[k]
    return result


def _reversion(regime: Regime, mu: Any, order: int) -> Series:
    """d_0..d_order of t(s) - t0 = sum d_k (s - s0)^k; d_0 = 0."""
    phi = phase_taylor(regime, mu, order + 1)
    psi = psi_taylor(mu, order + 1)
    phi[0] = phi[1] = 0 * mu
    d = [0 * mu] * (order + 1)
    d[1] = (psi[2] / phi[2]) ** 0.5
    for n in range(3, order + 2):
        lhs = _compose(phi, d + [0 * mu], n)[n]
        d[n - 1] = (psi[n] - lhs) / (2 * phi[2] * d[1])
    return d


def _degenerate_reversion(regime: Regime, order: int) -> List[float]:
    # mu = 0: t = t0 + (alpha + beta t0) expm1(u / c) / beta
    t0 = float(saddle_point(regime, 0.0))
    for c, alpha, beta in log_terms(regime, 0.0):
        if c == 0:
            continue
        base = alpha + beta * t0
        return [base / (beta * c**k * math.factorial(k)) for k in range(1, order + 1)]
    raise DomainError(f"No active phase term for {regime.label}")


def _check_order(order: int, cap: int, what: str) -> None:
    if order < 0:
        raise DomainError(f"{what} must be >= 0, got {order}")
    if order > cap:
        raise OrderOverflowError(f"{what} = {order} exceeds the supported maximum {cap}")


@lru_cache(maxsize=512)
def _cached_reversion(regime: Regime, mu: float, order: int) -> Tuple[float, ...]:
    if mu == 0.0:
        return tuple(_degenerate_reversion(regime, order))
    mp = _context(mu, order)
    d = _reversion(regime, mp.mpf(mu), order)
    return tuple(float(v) for v in d[1:])


def reversion_coefficients(ctx: SaddleContext, order: int) -> List[float]:
    """
    Coefficients d_1..d_order of t(s) = t0 + sum d_k (s - s0)^k.

    d_1 is the positive root sqrt(psi''(s0) / phi''(t0)).
    """
    if order < 1:
        raise DomainError(f"Reversion order must be >= 1, got {order}")
    _check_order(order, MAX_TAYLOR_ORDER + 1, "Reversion order")
    return list(_cached_reversion(ctx.regime, ctx.mu, order))


def _amplitude_series(regime: Regime, mu: Any, z: Any, M: int) -> Series:
    mp = mu.context
    if mu == 0:
        d = [mp.zero] + [mp.mpf(v) for v in _degenerate_reversion(regime, M + 1)]
    else:
        d = _reversion(regime, mu, M + 1)
    t0 = saddle_point(regime, mu)
    sign = exponent_sign(regime)

    shift = [sign * z * v for v in d]
    series = [mp.exp(sign * z * t0) * v for v in _exp0(shift, M)]
    slope = [k * d[k] for k in range(1, M + 2)]
    series = _mul(series, slope, M)
    s_factor = True
    for alpha, beta in weight_factors(regime):
        base = alpha + beta * t0
        if base == 0:
            # mu = 0: this weight and s = s - s0 both vanish at s0; divide out (s - s0)
            factor = [beta * v for v in d[1:]]
            s_factor = False
        else:
            factor = [base] + [beta * v for v in d[1:]]
        series = _mul(series, _inv(factor, M), M)
    if s_factor:
        series = _mul(series, [mu, mp.one], M)
    return series


@lru_cache(maxsize=512)
def _cached_pipeline(regime: Regime, mu: float, z: float, M: int, N: int) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    mp = _context(mu, M)
    a_m = _amplitude_series(regime, mp.mpf(mu), mp.mpf(z), M)
    f_n = _push(a_m, mp.mpf(mu), N)
    logger.debug(f"  [COEFFS] {regime.label} mu={mu:g} z={z:g} M={M} at {mp.dps} digits")
    return tuple(float(v) for v in a_m), tuple(float(v) for v in f_n)


def taylor_amplitude(ctx: SaddleContext, z: float, M: int) -> List[float]:
    """
    Taylor coefficients a_0..a_M of the case amplitude about s = s0.

    Args:
        ctx: Saddle context, mu > 0
        z: Kummer argument
        M: Highest Taylor order (at most 12)

    Returns:
        List of M + 1 coefficients
    """
    _check_order(M, MAX_TAYLOR_ORDER, "Taylor order")
    if ctx.mu <= 0.0:
        raise DomainError("taylor_amplitude requires mu > 0")
    a_m, _ = _cached_pipeline(ctx.regime, ctx.mu, float(z), M, 0)
    return list(a_m)


def _push(values: Sequence[Any], mu: Any, N: int) -> List[Any]:
    c = list(values)
    out = [c[0]]
    for _ in range(N):
        c = [m * c[m + 1] + mu * (m + 1) * c[m + 2] for m in range(len(c) - 2)]
        out.append(c[0])
    return out


def push_recursion(a_m: Sequence[float], mu: float, N: int) -> List[float]:
    """
    Run the coefficient recursion N levels deep.

    Returns f_0..f_N with f_n = c_0^(n) and c^(0) = a_m.
    """
    if not a_m:
        raise DomainError("push_recursion needs at least one coefficient")
    _check_order(len(a_m) - 1, MAX_TAYLOR_ORDER, "Taylor order")
    if N < 0 or 2 * N > len(a_m) - 1:
        raise OrderOverflowError(f"N = {N} needs {2 * N + 1} coefficients, got {len(a_m)}")
    return [float(v) for v in _push([float(v) for v in a_m], float(mu), N)]


def coefficient_table(ctx: SaddleContext, z: float, N: int) -> CoefficientTable:
    """Build a_0..a_2N, f_0..f_N and the normalized coefficients f_n / f_0."""
    _check_order(N, MAX_TERMS, "Coefficient count")
    a_tuple, f_tuple = _cached_pipeline(ctx.regime, ctx.mu, float(z), 2 * N, N)
    a_m, f_n = list(a_tuple), list(f_tuple)
    return CoefficientTable(
        regime=ctx.regime,
        mu=ctx.mu,
        z=float(z),
        a_m=a_m,
        f_n=f_n,
        normalized=[v / f_n[0] for v in f_n],
    )


def closed_form(regime: Regime, n: int, mu: float, z: float) -> float:
    """
    Printed closed forms of the normalized coefficients f~_n, g~_n, p~_n, q~_n.

    mu is taken formally, negative values included.
    """
    if n not in (0, 1, 2):
        raise DomainError(f"Closed forms exist for n = 0, 1, 2 only, got {n}")
    if n == 0:
        return 1.0
    m = mu
    if regime.order is Order.B_GE_A:
        k = 1.0 + m
    else:
        k = 1.0 - m
    if k == 0.0:
        raise DomainError(f"Closed form singular at mu = {mu!r} for {regime.label}")

    if regime.function is Function.M:
        if regime.order is Order.B_GE_A:
            if n == 1:
                return m * (k**2 + 6 * z**2) / (12 * k**3)
            return (
                m
                * (m * k**4 + 12 * (m - 12) * k**2 * z**2 + 96 * (m**2 - 1) * z**3 + 36 * m * z**4)
                / (288 * k**6)
            )
        if n == 1:
            return m * (k**2 + 6 * z**2) / (12 * k**3)
        return (
            m
            * (m * k**4 + 12 * (m + 12) * k**2 * z**2 + 96 * (1 - m**2) * z**3 + 36 * m * z**4)
            / (288 * k**6)
        )

    if regime.order is Order.B_GE_A:
        if n == 1:
            return m * (k**2 + 6 * z * (z - 2 - 2 * m)) / (12 * k**3)
        return (
            m
            * (
                m * k**4
                - 24 * (m - 12) * k**3 * z
                + 12 * (25 * m - 36) * k**2 * z**2
                - 48 * (5 * m - 2) * k * z**3
                + 36 * m * z**4
            )
            / (288 * k**6)
        )
    if n == 1:
        return m * (k**2 + 6 * z * (z - 2 + 2 * m)) / (12 * k**3)
    return (
        m
        * (
            m * k**4
            - 24 * (m + 12) * k**3 * z
            + 12 * (25 * m + 36) * k**2 * z**2
            - 48 * (5 * m + 2) * k * z**3
            + 36 * m * z**4
        )
        / (288 * k**6)
    )


def standard_form_expansion(
    a_m: Sequence[float], lam: float, x: float, N: int, kind: StandardForm = "laplace"
) -> List[float]:
    """
    Partial sums of the vanishing saddle point expansion of a standard form.

    laplace: F(x) = 1/Gamma(lam) int_0^inf s^(lam-1) e^(-xs) f(s) ds ~ x^(-lam) sum f_n / x^n
    loop:    G(x) ~ x^lam sum (-1)^n f_n / x^n

    Args:
        a_m: Taylor coefficients of f about s = lam / x
        lam: Positive exponent parameter
        x: Large variable
        N: Number of terms (1..6)
        kind: "laplace" or "loop"

    Returns:
        The N partial sums, one per truncation
    """
    if not lam > 0.0 or not x > 0.0:
        raise DomainError(f"standard_form_expansion requires lam > 0 and x > 0, got {lam!r}, {x!r}")
    if kind not in ("laplace", "loop"):
        raise DomainError(f"Unknown standard form {kind!r}")
    if not 1 <= N <= MAX_TERMS:
        raise OrderOverflowError(f"N must be in 1..{MAX_TERMS}, got {N}")
    mu = lam / x
    f_n = push_recursion(a_m, mu, N - 1)
    power = -lam if kind == "laplace" else lam
    front = math.exp(power * math.log(x))
    sign = 1.0 if kind == "laplace" else -1.0

    sums: List[float] = []
    total = 0.0
    for n, f in enumerate(f_n):
        total += sign**n * f / x**n
        sums.append(front * total)
    return sums
