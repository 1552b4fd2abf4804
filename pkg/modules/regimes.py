"""
Regimes Module - Case Classification and Saddle Geometry

Handles:
- Validated parameter sets (a, b, z)
- Classification into the four cases M/U with b >= a or b <= a
- Phase functions phi, psi, their derivatives and Taylor coefficients
- The transformation constant A(mu) and the steepest descent path of the
  M-case with b <= a
"""

import logging
import math
from enum import Enum
from typing import Any, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from modules.errors import DomainError

logger = logging.getLogger(__name__)


class Function(str, Enum):
    M = "M"
    U = "U"


class Order(str, Enum):
    B_GE_A = "b_ge_a"
    B_LE_A = "b_le_a"


class Regime(BaseModel):
    """One of the four expansion cases."""

    model_config = ConfigDict(frozen=True)

    function: Function
    order: Order

    @property
    def is_loop(self) -> bool:
        """True for the cases reduced to the loop integral (alternating sums)."""
        return (self.function, self.order) in (
            (Function.M, Order.B_LE_A),
            (Function.U, Order.B_GE_A),
        )

    @property
    def label(self) -> str:
        return f"{self.function.value}/{self.order.value}"

    @classmethod
    def parse(cls, function: Union[str, Function], order: Union[str, Order]) -> "Regime":
        try:
            return cls(function=Function(function), order=Order(order))
        except ValueError as e:
            raise DomainError(f"Unknown regime {function!r}/{order!r}") from e


class ParameterSet(BaseModel):
    """Validated (a, b, z), all strictly positive and finite."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0, allow_inf_nan=False)
    b: float = Field(..., gt=0, allow_inf_nan=False)
    z: float = Field(..., gt=0, allow_inf_nan=False)

    @classmethod
    def build(cls, a: float, b: float, z: float) -> "ParameterSet":
        try:
            return cls(a=a, b=b, z=z)
        except ValidationError as e:
            raise DomainError(f"Invalid parameters a={a!r}, b={b!r}, z={z!r}: {e.errors()[0]['msg']}") from e


class SaddleContext(BaseModel):
    """Regime plus the derived saddle geometry."""

    model_config = ConfigDict(frozen=True)

    regime: Regime
    lam: Optional[float] = Field(None, ge=0)
    mu: float = Field(..., ge=0)
    t0: float
    s0: float
    A: float


Number = Any  # float or an mpmath mpf

DEFAULT_MU_CAP = 10.0


def _as_regime(fn: Union[str, Function], order: Union[str, Order]) -> Regime:
    return Regime.parse(fn, order)


def saddle_point(regime: Regime, mu: Number) -> Number:
    """Interior saddle t0 of phi; works for floats and mpmath numbers."""
    if regime.order is Order.B_GE_A:
        return mu / (1 + mu)
    if regime.function is Function.M:
        return 1 / (1 - mu)
    return mu / (1 - mu)


def closed_form_A(order: Order, mu: float) -> float:
    if order is Order.B_GE_A:
        return (1.0 + mu) * math.log1p(mu) - mu
    return -(1.0 - mu) * math.log1p(-mu) - mu


def make_context(regime: Regime, mu: float, lam: Optional[float] = None) -> SaddleContext:
    """Build a context from a regime and mu alone (coefficient inspection)."""
    mu = float(mu)
    if not math.isfinite(mu) or mu < 0.0:
        raise DomainError(f"mu must be finite and >= 0, got {mu!r}")
    if regime.order is Order.B_LE_A and mu >= 1.0:
        raise DomainError(f"b <= a cases require mu < 1, got {mu!r}")
    return SaddleContext(
        regime=regime,
        lam=lam,
        mu=mu,
        t0=saddle_point(regime, mu),
        s0=mu,
        A=closed_form_A(regime.order, mu),
    )


def classify(p: ParameterSet, fn: Union[str, Function], mu_cap: float = DEFAULT_MU_CAP) -> SaddleContext:
    """
    Classify (a, b) for the function fn and compute the saddle geometry.

    a == b goes to the b >= a branch with mu = 0.
    """
    order = Order.B_GE_A if p.b >= p.a else Order.B_LE_A
    regime = _as_regime(fn, order)
    lam = abs(p.b - p.a)
    mu = lam / p.a
    if order is Order.B_GE_A and mu > mu_cap:
        raise DomainError(f"mu = {mu:.6g} exceeds the configured cap {mu_cap:g} (b >> a)")
    ctx = make_context(regime, mu, lam=lam)
    logger.debug(f"  [REGIME] {regime.label} mu={mu:.6g} t0={ctx.t0:.6g}")
    return ctx


def constant_A(ctx: SaddleContext) -> float:
    """A = phi(t0) - psi(s0) in closed form."""
    return closed_form_A(ctx.regime.order, ctx.mu)


def log_terms(regime: Regime, mu: Number) -> Tuple[Tuple[Number, int, int], ...]:
    """phi(t) as a sum of c * ln(alpha + beta t); entries are (c, alpha, beta)."""
    if regime.order is Order.B_GE_A:
        return ((-1, 1, -1), (-mu, 0, 1))
    if regime.function is Function.M:
        return ((1, 0, 1), (-mu, -1, 1))
    return ((1, 1, 1), (-mu, 0, 1))


def weight_factors(regime: Regime) -> Tuple[Tuple[int, int], ...]:
    """(alpha, beta) pairs whose product alpha + beta t is the amplitude denominator."""
    if regime.function is Function.U:
        return ((0, 1),)
    if regime.order is Order.B_GE_A:
        return ((0, 1), (1, -1))
    return ((0, 1), (-1, 1))


def exponent_sign(regime: Regime) -> int:
    """Sign s of the factor e^(s z t) carried by the amplitude."""
    if regime.function is Function.M:
        return -1 if regime.order is Order.B_GE_A else 1
    return 1 if regime.order is Order.B_GE_A else -1


def t_domain(ctx: SaddleContext) -> Tuple[float, float]:
    """Open real interval in which t lives for the case."""
    if ctx.regime.order is Order.B_GE_A:
        return (0.0, 1.0)
    if ctx.regime.function is Function.M:
        return (1.0, math.inf)
    return (0.0, math.inf)


def _check_t(ctx: SaddleContext, t: float) -> None:
    lo, hi = t_domain(ctx)
    if not lo < t < hi:
        raise DomainError(f"t = {t!r} outside ({lo}, {hi}) for {ctx.regime.label}")


def phi(ctx: SaddleContext, t: float) -> float:
    """Phase function of the case at real t."""
    _check_t(ctx, t)
    return sum(c * math.log(alpha + beta * t) for c, alpha, beta in log_terms(ctx.regime, ctx.mu))


def dphi(ctx: SaddleContext, t: float) -> float:
    _check_t(ctx, t)
    return sum(c * beta / (alpha + beta * t) for c, alpha, beta in log_terms(ctx.regime, ctx.mu))


def d2phi(ctx: SaddleContext, t: float) -> float:
    _check_t(ctx, t)
    return -sum(c * beta * beta / (alpha + beta * t) ** 2 for c, alpha, beta in log_terms(ctx.regime, ctx.mu))


def psi(ctx: SaddleContext, s: float) -> float:
    """psi(s) = s - mu ln s."""
    if not s > 0.0:
        raise DomainError(f"psi requires s > 0, got {s!r}")
    if ctx.mu == 0.0:
        return s
    return s - ctx.mu * math.log(s)


def dpsi(ctx: SaddleContext, s: float) -> float:
    if not s > 0.0:
        raise DomainError(f"psi requires s > 0, got {s!r}")
    return 1.0 - ctx.mu / s


def phase_taylor(regime: Regime, mu: Number, order: int) -> List[Number]:
    """
    Taylor coefficients phi_j = phi^(j)(t0) / j!, j = 0..order.

    Works for floats and mpmath numbers alike; mu must be > 0.
    """
    t0 = saddle_point(regime, mu)
    terms = log_terms(regime, mu)
    coeffs: List[Number] = [0 * mu] * (order + 1)
    coeffs[0] = sum(c * _log(alpha + beta * t0) for c, alpha, beta in terms)
    for j in range(1, order + 1):
        sign = 1 if j % 2 == 1 else -1
        coeffs[j] = sum(sign * c * beta**j / (j * (alpha + beta * t0) ** j) for c, alpha, beta in terms)
    return coeffs


def psi_taylor(mu: Number, order: int) -> List[Number]:
    """Taylor coefficients of psi about s0 = mu: psi_j = (-1)^j / (j mu^(j-1)) for j >= 2."""
    coeffs: List[Number] = [0 * mu] * (order + 1)
    coeffs[0] = mu - mu * _log(mu)
    for j in range(2, order + 1):
        sign = 1 if j % 2 == 0 else -1
        coeffs[j] = sign / (j * mu ** (j - 1))
    return coeffs


def _log(x: Number) -> Number:
    if isinstance(x, float) or isinstance(x, int):
        return math.log(x)
    return x.context.log(x)


def steepest_descent_radius(mu: float, theta: float) -> float:
    """
    Polar radius r(theta) of the steepest descent path through t0 = 1/(1-mu)
    for the M-case with b <= a: r = sin(theta/mu) / sin((1-mu) theta/mu).
    """
    if not 0.0 < mu < 1.0:
        raise DomainError(f"Steepest descent path requires 0 < mu < 1, got {mu!r}")
    if abs(theta) > mu * math.pi * (1.0 + 1e-12):
        raise DomainError(f"theta = {theta!r} outside [-mu pi, mu pi]")
    if abs(theta) < 1e-9:
        # even in theta; second-order term of the ratio of sines
        x = theta / mu
        return (1.0 + ((1.0 - mu) ** 2 - 1.0) * x * x / 6.0) / (1.0 - mu)
    return math.sin(theta / mu) / math.sin((1.0 - mu) * theta / mu)
