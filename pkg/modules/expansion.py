"""
Expansion Module - Uniform Asymptotic Expansions of M and U

Handles:
- Front factors in log space, in both the reduced (scaled gamma) and the
  original form
- Coefficient sums with the alternating sign of the loop-integral cases
- Truncation and the heuristic error estimate
- Convergence profiles against the oracle
"""

import logging
import math
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from modules.coeffs import MAX_TERMS, closed_form, coefficient_table
from modules.errors import ConvergenceError, OrderOverflowError
from modules.oracle import OracleModule
from modules.regimes import (
    DEFAULT_MU_CAP,
    Function,
    Order,
    ParameterSet,
    Regime,
    SaddleContext,
    classify,
)
from modules.scalarfun import log_gamma, log_gamma_star

logger = logging.getLogger(__name__)


# exp() stays finite below this
_LOG_MAX = 709.0
_LOG_MIN = -708.0
_CLOSED_FORM_ORDERS = 3


class EvalResult(BaseModel):
    """An expansion value with its truncation diagnostics."""

    model_config = ConfigDict(frozen=True)

    value: Optional[float]
    log_value: float
    terms_used: int = Field(..., ge=1)
    term_magnitudes: List[float]
    error_estimate: float = Field(..., ge=0)
    regime: Regime
    a: float
    b: float
    z: float
    mu: float
    coefficients: List[float]

    def to_record(self) -> Dict[str, Any]:
        """Flat, JSON-ready view."""
        record = self.model_dump(mode="json", exclude={"regime"})
        record["function"] = self.regime.function.value
        record["order"] = self.regime.order.value
        return record


def _log_saddle_amplitude(ctx: SaddleContext, z: float) -> float:
    """ln p0 or ln q0."""
    mu = ctx.mu
    if ctx.regime.order is Order.B_GE_A:
        return z * mu / (1.0 + mu) - 0.5 * math.log1p(mu)
    return -z * mu / (1.0 - mu) - 0.5 * math.log1p(-mu)


def _log_front(ctx: SaddleContext, p: ParameterSet) -> float:
    a, b, z, mu = p.a, p.b, p.z, ctx.mu
    if ctx.regime.function is Function.M:
        k = 1.0 + mu if ctx.regime.order is Order.B_GE_A else 1.0 - mu
        return z / k + log_gamma_star(b) - log_gamma_star(a)
    d = b - a
    # b ln b - a ln a + a - b
    powers = d * math.log(b) + a * math.log1p(d / a) - d
    return -b * math.log(z) + powers + _log_saddle_amplitude(ctx, z)


def log_front_factor(p: ParameterSet, fn: Union[str, Function], mu_cap: float = DEFAULT_MU_CAP) -> float:
    """
    Log of the front factor in its scaled-gamma form.

    M: z/(1 +- mu) + ln Gamma*(b) - ln Gamma*(a)
    U: -b ln z + b ln b - a ln a + a - b + ln p0 (or ln q0)
    """
    return _log_front(classify(p, fn, mu_cap), p)


def log_front_factor_unreduced(p: ParameterSet, fn: Union[str, Function], mu_cap: float = DEFAULT_MU_CAP) -> float:
    """Log of the front factor as it comes out of the integral, before Gamma* is introduced."""
    ctx = classify(p, fn, mu_cap)
    a, b, z = p.a, p.b, p.z
    lam, mu, A, t0 = ctx.lam or 0.0, ctx.mu, ctx.A, ctx.t0
    ge = ctx.regime.order is Order.B_GE_A
    if ctx.regime.function is Function.M:
        gammas = log_gamma(b) - log_gamma(a)
        if ge:
            return z - a * A + gammas - lam * math.log(a) - z * t0 + 0.5 * math.log1p(mu)
        return a * A + gammas + lam * math.log(a) + z * t0 + 0.5 * math.log1p(-mu)
    head = -b * math.log(z) + _log_saddle_amplitude(ctx, z)
    if ge:
        return head + lam * math.log(a) + a * A
    return head - lam * math.log(a) - a * A


class ExpansionModule:
    """Evaluates the four expansions with a configured truncation policy."""

    def __init__(self, config: Dict[str, Any]):
        """Initialize expansion module with configuration."""
        self.config = config
        self.default_terms = int(config.get("terms", 3))
        self.safety_factor = float(config.get("safety_factor", 10.0))
        self.mu_cap = float(config.get("mu_cap", DEFAULT_MU_CAP))
        self.pipeline_mu_floor = float(config.get("pipeline_mu_floor", 1e-20))
        logger.info(
            f"  [OK] ExpansionModule initialized (terms={self.default_terms}, "
            f"safety_factor={self.safety_factor:g})"
        )

    def _coefficients(self, ctx: SaddleContext, z: float, count: int) -> List[float]:
        coeffs = [closed_form(ctx.regime, n, ctx.mu, z) for n in range(min(count, _CLOSED_FORM_ORDERS))]
        if count <= _CLOSED_FORM_ORDERS:
            return coeffs
        if ctx.mu < self.pipeline_mu_floor:
            if ctx.mu > 0.0:
                logger.debug(f"  [EVAL] mu={ctx.mu:g} below pipeline floor, higher coefficients set to 0")
            return coeffs + [0.0] * (count - _CLOSED_FORM_ORDERS)
        table = coefficient_table(ctx, z, count - 1)
        return coeffs + table.normalized[_CLOSED_FORM_ORDERS:count]

    def _value(self, ctx: SaddleContext, p: ParameterSet, total: float, log_value: float) -> Optional[float]:
        if not _LOG_MIN < log_value < _LOG_MAX:
            return None
        try:
            if ctx.regime.function is Function.M:
                k = 1.0 + ctx.mu if ctx.regime.order is Order.B_GE_A else 1.0 - ctx.mu
                gammas = log_gamma_star(p.b) - log_gamma_star(p.a)
                return math.exp(p.z / k) * math.exp(gammas) * total
            power = p.z ** (-p.b)
            rest = log_value + p.b * math.log(p.z)
            if power > 1e-300 and math.isfinite(power) and abs(rest) < _LOG_MAX:
                return power * math.exp(rest)
        except OverflowError:
            pass
        return math.exp(log_value)

    def evaluate(self, p: ParameterSet, fn: Union[str, Function], N: Optional[int] = None) -> EvalResult:
        """
        Evaluate M(a, b, z) or U(a, b+1, z) from the expansion of the matching case.

        Args:
            p: Parameters
            fn: Function.M or Function.U
            N: Number of terms (1..6), defaults to the configured count

        Returns:
            EvalResult with value, log_value and truncation diagnostics
        """
        N = self.default_terms if N is None else N
        if not 1 <= N <= MAX_TERMS:
            raise OrderOverflowError(f"Number of terms must be in 1..{MAX_TERMS}, got {N}")
        ctx = classify(p, fn, self.mu_cap)
        coeffs = self._coefficients(ctx, p.z, N + 1)

        sign = -1.0 if ctx.regime.is_loop else 1.0
        terms = [sign**n * c / p.a**n for n, c in enumerate(coeffs)]
        total = sum(terms[:N])
        if not total > 0.0:
            raise ConvergenceError(
                f"Coefficient sum {total!r} is not positive for {ctx.regime.label} at a={p.a:g}"
            )
        log_value = _log_front(ctx, p) + math.log(total)
        value = self._value(ctx, p, total, log_value)
        if value is None:
            logger.warning(f"  [WARN] {ctx.regime.label} value not representable, log_value={log_value:.6g}")

        logger.info(f"  [EVAL] {ctx.regime.label} a={p.a:g} b={p.b:g} z={p.z:g} N={N}")
        return EvalResult(
            value=value,
            log_value=log_value,
            terms_used=N,
            term_magnitudes=[abs(t) for t in terms[:N]],
            error_estimate=self.safety_factor * abs(terms[N]),
            regime=ctx.regime,
            a=p.a,
            b=p.b,
            z=p.z,
            mu=ctx.mu,
            coefficients=coeffs[:N],
        )

    def evaluate_M(self, p: ParameterSet, N: Optional[int] = None) -> EvalResult:
        return self.evaluate(p, Function.M, N)

    def evaluate_U(self, p: ParameterSet, N: Optional[int] = None) -> EvalResult:
        """U(a, b+1, z); the second Kummer parameter is b + 1."""
        return self.evaluate(p, Function.U, N)

    def first_order(self, p: ParameterSet, fn: Union[str, Function]) -> EvalResult:
        """The one-term approximation."""
        return self.evaluate(p, fn, 1)

    def convergence_profile(
        self,
        p: ParameterSet,
        fn: Union[str, Function],
        N_max: int,
        oracle: Optional[OracleModule] = None,
    ) -> List[Tuple[int, float]]:
        """
        Relative error against the oracle for N = 1..N_max terms.

        Returns:
            List of (terms, relative_error)
        """
        if not 1 <= N_max <= MAX_TERMS:
            raise OrderOverflowError(f"N_max must be in 1..{MAX_TERMS}, got {N_max}")
        oracle = oracle or OracleModule(self.config)
        log_reference = oracle.log_value(Function(fn), p.a, p.b, p.z)
        profile: List[Tuple[int, float]] = []
        for N in range(1, N_max + 1):
            result = self.evaluate(p, fn, N)
            profile.append((N, abs(math.expm1(result.log_value - log_reference))))
        return profile
