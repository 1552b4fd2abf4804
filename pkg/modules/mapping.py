"""
Mapping Module - Saddle-to-Saddle Transformation

Handles:
- Inversion of phi(t) - phi(t0) = psi(s) - psi(s0) for every case (t as a function of s)
- The Lambert W form of the same transformation (s as a function of t)
- The transformed amplitude functions f, g, p and q
"""

import logging
import math
from typing import Any, Dict, List, Sequence

from pydantic import BaseModel, ConfigDict, Field

from modules.coeffs import reversion_coefficients
from modules.errors import ConvergenceError, DomainError
from modules.regimes import (
    Function,
    Order,
    SaddleContext,
    exponent_sign,
    log_terms,
    t_domain,
    weight_factors,
)
from modules.scalarfun import lambert_w

logger = logging.getLogger(__name__)


class MapPoint(BaseModel):
    """A point (s, t(s)) of the transformation with its derivative."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(..., gt=0)
    t: float
    dtds: float = Field(..., ge=0)


_EPS = 2.220446049250313e-16
_NEWTON_MAX_ITER = 200
_MAX_EXPAND = 1100
_RESIDUAL_TOL = 1e-13
_SERIES_RADIUS = 1e-6
# beyond this level exp(-level) underflows before reaching lambert_w
_LAMBERT_LEVEL_MAX = 700.0


def _check_s(s: float) -> float:
    s = float(s)
    if not math.isfinite(s) or s <= 0.0:
        raise DomainError(f"s must be finite and > 0, got {s!r}")
    return s


def _phi_delta(ctx: SaddleContext, t: float) -> float:
    """phi(t) - phi(t0), summed term by term through log1p."""
    total = 0.0
    for c, alpha, beta in log_terms(ctx.regime, ctx.mu):
        if c == 0:
            continue
        base = alpha + beta * ctx.t0
        total += c * math.log1p(beta * (t - ctx.t0) / base)
    return total


def _dphi(ctx: SaddleContext, t: float) -> float:
    """phi'(t) written as a multiple of (t - t0)."""
    total = 0.0
    for c, alpha, beta in log_terms(ctx.regime, ctx.mu):
        if c == 0:
            continue
        total += c * beta * beta / ((alpha + beta * t) * (alpha + beta * ctx.t0))
    return -(t - ctx.t0) * total


def _psi_delta(mu: float, s: float) -> float:
    """psi(s) - psi(s0)."""
    if mu == 0.0:
        return s
    u = s - mu
    return u - mu * math.log1p(u / mu)


def saddle_slope(ctx: SaddleContext) -> float:
    """dt/ds at s = s0, the square root of psi''(s0) / phi''(t0)."""
    if ctx.regime.order is Order.B_GE_A:
        return (1.0 + ctx.mu) ** -1.5
    return (1.0 - ctx.mu) ** -1.5


def _degenerate_point(ctx: SaddleContext, s: float) -> MapPoint:
    # mu = 0: the log term carrying mu drops and c ln((alpha + beta t)/(alpha + beta t0)) = s
    for c, alpha, beta in log_terms(ctx.regime, 0.0):
        if c == 0:
            continue
        base = alpha + beta * ctx.t0
        t = ctx.t0 + base * math.expm1(s / c) / beta
        dtds = base * math.exp(s / c) / (c * beta)
        return MapPoint(s=s, t=t, dtds=dtds)
    raise DomainError(f"No active phase term for {ctx.regime.label}")


def _series_point(ctx: SaddleContext, s: float) -> MapPoint:
    d1, d2 = reversion_coefficients(ctx, 2)
    u = s - ctx.s0
    return MapPoint(s=s, t=ctx.t0 + d1 * u + d2 * u * u, dtds=d1 + 2.0 * d2 * u)


def _outer_bracket(ctx: SaddleContext, right: bool, target: float) -> float:
    lo, hi = t_domain(ctx)
    if not right:
        return lo
    if not math.isinf(hi):
        return hi
    outer = max(2.0 * ctx.t0, ctx.t0 + 1.0)
    for _ in range(_MAX_EXPAND):
        if _phi_delta(ctx, outer) > target:
            return outer
        outer *= 2.0
    raise ConvergenceError(f"Could not bracket t for {ctx.regime.label}, target={target!r}")


def _polish(ctx: SaddleContext, t: float, g: float) -> float:
    """One last Newton step; the residual test alone leaves t loose near the saddle."""
    dg = _dphi(ctx, t)
    if dg == 0.0:
        return t
    lo, hi = t_domain(ctx)
    polished = t - g / dg
    if lo < polished < hi and (polished - ctx.t0) * (t - ctx.t0) > 0.0:
        return polished
    return t


def _solve_t(ctx: SaddleContext, s: float, target: float) -> float:
    """Safeguarded Newton for phi(t) - phi(t0) = target on the side selected by s."""
    right = s > ctx.s0
    inner = ctx.t0
    outer = _outer_bracket(ctx, right, target)
    tol = _RESIDUAL_TOL * (1.0 + target)

    t = ctx.t0 + saddle_slope(ctx) * (s - ctx.s0)
    if not min(inner, outer) < t < max(inner, outer):
        t = 0.5 * (inner + outer)

    for iteration in range(_NEWTON_MAX_ITER):
        g = _phi_delta(ctx, t) - target
        if abs(g) <= tol:
            logger.debug(f"  [MAP] {ctx.regime.label} converged in {iteration} steps")
            return _polish(ctx, t, g)
        if g < 0.0:
            inner = t
        else:
            outer = t
        dg = _dphi(ctx, t)
        t_new = t - g / dg if dg != 0.0 else math.nan
        if not min(inner, outer) < t_new < max(inner, outer):
            t_new = 0.5 * (inner + outer)
        if abs(t_new - t) <= 4.0 * _EPS * abs(t_new):
            return t_new
        t = t_new
    raise ConvergenceError(
        f"map_t_of_s({ctx.regime.label}, mu={ctx.mu!r}, s={s!r}) did not converge "
        f"in {_NEWTON_MAX_ITER} steps"
    )


def map_t_of_s(ctx: SaddleContext, s: float) -> MapPoint:
    """
    Solve the transformation for t at a given s.

    Args:
        ctx: Saddle context of the case
        s: Point on the positive real s-axis

    Returns:
        MapPoint with t on the same side of t0 as s is of s0, and dt/ds
    """
    s = _check_s(s)
    if ctx.mu == 0.0:
        return _degenerate_point(ctx, s)
    if s == ctx.s0:
        return MapPoint(s=s, t=ctx.t0, dtds=saddle_slope(ctx))
    if abs(s - ctx.s0) < _SERIES_RADIUS * ctx.s0:
        return _series_point(ctx, s)

    target = _psi_delta(ctx.mu, s)
    t = _solve_t(ctx, s, target)
    dtds = (s - ctx.mu) / s / _dphi(ctx, t)
    return MapPoint(s=s, t=t, dtds=dtds)


def s_of_t(ctx: SaddleContext, t: float) -> float:
    """
    Lambert W form of the transformation: s = -mu W(-exp(-1 - (phi(t) - phi(t0))/mu)).

    The lower branch gives s > s0 (t > t0), the principal branch s < s0.
    """
    lo, hi = t_domain(ctx)
    if not lo < t < hi:
        raise DomainError(f"t = {t!r} outside ({lo}, {hi}) for {ctx.regime.label}")
    delta = _phi_delta(ctx, t)
    mu = ctx.mu
    if mu == 0.0:
        return delta
    if t == ctx.t0:
        return mu

    level = 1.0 + delta / mu
    lower = t > ctx.t0
    if level < _LAMBERT_LEVEL_MAX:
        w = lambert_w("lower" if lower else "principal", -math.exp(-level))
        return -mu * w
    # y - ln y = level with y = s / mu
    if not lower:
        return mu * math.exp(-level)
    y = level
    for _ in range(50):
        y = level + math.log(y)
    return mu * y


def saddle_amplitude(ctx: SaddleContext, z: float) -> float:
    """Closed forms f0, g0, p0, q0 of the amplitude at s = s0."""
    mu, t0 = ctx.mu, ctx.t0
    regime = ctx.regime
    if regime.function is Function.M:
        if regime.order is Order.B_GE_A:
            return math.exp(-z * t0) * math.sqrt(1.0 + mu)
        return math.exp(z * t0) * math.sqrt(1.0 - mu)
    if regime.order is Order.B_GE_A:
        return math.exp(z * mu / (1.0 + mu)) / math.sqrt(1.0 + mu)
    return math.exp(-z * mu / (1.0 - mu)) / math.sqrt(1.0 - mu)


def amplitude(ctx: SaddleContext, s: float, z: float) -> float:
    """
    Case amplitude at s.

    f = e^(-zt) s/(t(1-t)) dt/ds, g = e^(zt) s/(t(t-1)) dt/ds,
    p = e^(zt) (s/t) dt/ds and q = e^(-zt) (s/t) dt/ds.
    """
    s = _check_s(s)
    if s == ctx.s0:
        return saddle_amplitude(ctx, z)
    point = map_t_of_s(ctx, s)
    log_amp = exponent_sign(ctx.regime) * z * point.t + math.log(s) + math.log(point.dtds)
    for alpha, beta in weight_factors(ctx.regime):
        log_amp -= math.log(alpha + beta * point.t)
    if log_amp > 709.0:
        raise DomainError(f"Amplitude overflows at s={s!r} for {ctx.regime.label}")
    return math.exp(log_amp)


def transformation_samples(ctx: SaddleContext, z: float, s_values: Sequence[float]) -> List[Dict[str, Any]]:
    """Rows (s, t, dt/ds, amplitude) for plotting the transformation."""
    rows: List[Dict[str, Any]] = []
    for s in s_values:
        point = map_t_of_s(ctx, s)
        rows.append(
            {
                "s": point.s,
                "t": point.t,
                "dtds": point.dtds,
                "amplitude": amplitude(ctx, point.s, z),
            }
        )
    logger.info(f"  [MAP] {ctx.regime.label} mu={ctx.mu:g}: {len(rows)} samples")
    return rows
