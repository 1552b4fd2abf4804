"""
Tests for the coefficient engine: reversion, amplitude Taylor coefficients,
the coefficient recursion and the closed forms.
"""

import math

import mpmath
import numpy as np
import pytest

from modules.coeffs import (
    MAX_TAYLOR_ORDER,
    closed_form,
    coefficient_table,
    push_recursion,
    reversion_coefficients,
    standard_form_expansion,
    taylor_amplitude,
)
from modules.errors import DomainError, OrderOverflowError
from modules.mapping import amplitude, saddle_amplitude
from modules.regimes import Order, Regime, make_context

M_GE = Regime.parse("M", "b_ge_a")
M_LE = Regime.parse("M", "b_le_a")
U_GE = Regime.parse("U", "b_ge_a")
U_LE = Regime.parse("U", "b_le_a")
ALL_REGIMES = [M_GE, M_LE, U_GE, U_LE]


def _pipeline_grid(regime):
    grid = [0.1, 0.3, 0.6]
    if regime.order is Order.B_GE_A:
        grid += [1.0, 2.0]
    return grid


class TestReversion:
    """Test the series t(s) about the saddle."""

    @pytest.mark.parametrize("regime", ALL_REGIMES, ids=lambda r: r.label)
    def test_first_coefficient(self, regime):
        """Test d1 is the saddle slope (1 +- mu)^(-3/2)."""
        ctx = make_context(regime, 0.4)
        k = 1.4 if regime.order is Order.B_GE_A else 0.6
        d = reversion_coefficients(ctx, 3)
        assert len(d) == 3
        assert d[0] == pytest.approx(k**-1.5, rel=1e-13)

    def test_degenerate(self):
        """Test mu = 0, where t = 1 - e^(-s)."""
        d = reversion_coefficients(make_context(M_GE, 0.0), 4)
        expected = [(-1.0) ** (k + 1) / math.factorial(k) for k in range(1, 5)]
        assert d == pytest.approx(expected, rel=1e-15)

    def test_order_limits(self):
        """Test the order must be positive and bounded."""
        ctx = make_context(M_GE, 0.4)
        with pytest.raises(DomainError):
            reversion_coefficients(ctx, 0)
        with pytest.raises(OrderOverflowError):
            reversion_coefficients(ctx, MAX_TAYLOR_ORDER + 2)


class TestTaylorAmplitude:
    """Test the Taylor coefficients of the amplitude about s0."""

    def test_leading_coefficient(self):
        """Test a0 equals f0 at mu = 1/3, z = 1."""
        ctx = make_context(M_GE, 1.0 / 3.0)
        a = taylor_amplitude(ctx, 1.0, 4)
        assert len(a) == 5
        assert a[0] == pytest.approx(math.exp(-0.25) * math.sqrt(4.0 / 3.0), rel=1e-13)

    @pytest.mark.parametrize("regime", ALL_REGIMES, ids=lambda r: r.label)
    def test_matches_saddle_value(self, regime):
        """Test a0 against the closed saddle amplitude."""
        ctx = make_context(regime, 0.5)
        assert taylor_amplitude(ctx, 2.0, 2)[0] == pytest.approx(saddle_amplitude(ctx, 2.0), rel=1e-13)

    @pytest.mark.parametrize("regime", ALL_REGIMES, ids=lambda r: r.label)
    def test_taylor_polynomial(self, regime):
        """Test the Taylor polynomial reproduces the amplitude next to s0."""
        ctx = make_context(regime, 0.5)
        z = 1.0
        a = taylor_amplitude(ctx, z, 6)
        for h in (-0.02 * ctx.s0, 0.02 * ctx.s0):
            poly = sum(c * h**m for m, c in enumerate(a))
            assert poly == pytest.approx(amplitude(ctx, ctx.s0 + h, z), rel=1e-7)

    def test_order_overflow(self):
        """Test M above the supported maximum."""
        with pytest.raises(OrderOverflowError):
            taylor_amplitude(make_context(M_GE, 0.3), 1.0, MAX_TAYLOR_ORDER + 1)

    def test_requires_positive_mu(self):
        """Test mu = 0 is rejected."""
        with pytest.raises(DomainError):
            taylor_amplitude(make_context(M_GE, 0.0), 1.0, 4)


class TestPushRecursion:
    """Test the coefficient recursion."""

    def test_low_orders(self):
        """Test f0 = a0, f1 = mu a2 and f2 = mu (2 a3 + 3 mu a4)."""
        a = [1.5, -0.3, 0.7, 0.2, -0.4]
        mu = 0.6
        f = push_recursion(a, mu, 2)
        assert f[0] == 1.5
        assert f[1] == pytest.approx(mu * 0.7, rel=1e-15)
        assert f[2] == pytest.approx(mu * (2 * 0.2 + 3 * mu * -0.4), rel=1e-14)

    def test_third_and_fourth_orders(self):
        """Test f3 and f4 on random coefficient vectors."""
        rng = np.random.default_rng(20240611)
        for _ in range(25):
            a = rng.uniform(-2.0, 2.0, size=9)
            mu = float(rng.uniform(0.05, 3.0))
            f = push_recursion(a.tolist(), mu, 4)

            terms3 = [6 * a[4], 20 * mu * a[5], 15 * mu**2 * a[6]]
            terms4 = [24 * a[5], 130 * mu * a[6], 210 * mu**2 * a[7], 105 * mu**3 * a[8]]
            for value, terms in ((f[3], terms3), (f[4], terms4)):
                scale = mu * sum(abs(t) for t in terms)
                assert abs(value - mu * sum(terms)) <= 1e-13 * scale

    def test_constant_amplitude(self):
        """Test a constant amplitude has no corrections."""
        assert push_recursion([2.0] + [0.0] * 8, 0.5, 4) == [2.0, 0.0, 0.0, 0.0, 0.0]

    def test_quadratic_amplitude(self):
        """Test a2 = 1 alone gives f1 = mu and nothing after."""
        f = push_recursion([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 0.25, 3)
        assert f == pytest.approx([0.0, 0.25, 0.0, 0.0])

    def test_needs_enough_coefficients(self):
        """Test N levels need 2N + 1 coefficients."""
        with pytest.raises(OrderOverflowError):
            push_recursion([1.0, 0.0, 0.0], 0.5, 2)
        with pytest.raises(DomainError):
            push_recursion([], 0.5, 0)


class TestClosedForms:
    """Test the closed forms and their reproduction by the pipeline."""

    def test_examples(self):
        """Test substitutions into the closed forms."""
        assert closed_form(M_GE, 1, 1.0, 1.0) == pytest.approx(5.0 / 48.0, rel=1e-14)
        assert closed_form(M_LE, 1, 0.5, 1.0) == pytest.approx(2.0833333333333333, rel=1e-14)
        assert closed_form(U_LE, 0, 0.5, 1.0) == 1.0
        assert closed_form(U_GE, 1, 0.0, 2.0) == 0.0

    def test_zero_argument(self):
        """Test f1 at mu = 0.5, z = 0 is mu / (12 (1 + mu)) = 1/36."""
        assert closed_form(M_GE, 1, 0.5, 0.0) == pytest.approx(1.0 / 36.0, rel=1e-14)
        table = coefficient_table(make_context(M_GE, 0.5), 0.0, 1)
        assert table.normalized[1] == pytest.approx(1.0 / 36.0, rel=1e-12)

    def test_rejects_orders(self):
        """Test only n = 0, 1, 2 have closed forms."""
        with pytest.raises(DomainError):
            closed_form(M_GE, 3, 0.5, 1.0)
        with pytest.raises(DomainError):
            closed_form(M_GE, 1, -1.0, 1.0)

    @pytest.mark.parametrize("regime", ALL_REGIMES, ids=lambda r: r.label)
    def test_pipeline_reproduces_closed_forms(self, regime):
        """Test the numeric pipeline against the closed forms for n = 1, 2."""
        for mu in _pipeline_grid(regime):
            ctx = make_context(regime, mu)
            for z in (0.5, 1.0, 3.0):
                table = coefficient_table(ctx, z, 2)
                for n in (1, 2):
                    expected = closed_form(regime, n, mu, z)
                    assert table.normalized[n] == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_table_shapes(self):
        """Test the table holds a_0..a_2N and f_0..f_N."""
        table = coefficient_table(make_context(U_LE, 0.4), 1.0, 3)
        assert len(table.a_m) == 7
        assert len(table.f_n) == 4
        assert table.normalized[0] == 1.0
        assert table.f_n[0] == pytest.approx(table.a_m[0])

    def test_degenerate_table(self):
        """Test mu = 0 keeps only f0 while the amplitude coefficients survive."""
        table = coefficient_table(make_context(U_GE, 0.0), 1.0, 3)
        assert table.normalized == [1.0, 0.0, 0.0, 0.0]
        assert len(table.a_m) == 7

    @pytest.mark.parametrize(
        "regime,a0,a1",
        [
            (M_GE, 1.0, 0.5 - 1.5),
            (M_LE, math.exp(1.5), math.exp(1.5) * (1.5 - 0.5)),
            (U_LE, 1.0, 0.5 - 1.5),
        ],
        ids=lambda v: v.label if isinstance(v, Regime) else None,
    )
    def test_degenerate_amplitude(self, regime, a0, a1):
        """Test a0 and a1 at mu = 0 from the explicit map t(s)."""
        ctx = make_context(regime, 0.0)
        table = coefficient_table(ctx, 1.5, 2)
        assert table.f_n[0] == pytest.approx(saddle_amplitude(ctx, 1.5), rel=1e-14)
        assert table.a_m[0] == pytest.approx(a0, rel=1e-14)
        assert table.a_m[1] == pytest.approx(a1, rel=1e-13)
        assert table.f_n[1:] == [0.0, 0.0]
        assert table.normalized == [1.0, 0.0, 0.0]

    def test_degenerate_taylor_polynomial(self):
        """Test the mu = 0 coefficients reproduce g = e^(z e^s) s / (e^s - 1)."""
        ctx = make_context(M_LE, 0.0)
        z = 0.7
        a = coefficient_table(ctx, z, 4).a_m
        for s in (0.01, 0.02):
            expected = math.exp(z * math.exp(s)) * s / math.expm1(s)
            assert sum(c * s**m for m, c in enumerate(a)) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("mu", np.linspace(0.05, 0.85, 9).tolist())
    def test_sign_symmetry_m(self, mu):
        """Test f~n(-mu) = (-1)^n g~n(mu)."""
        for z in (0.5, 2.0):
            for n in (1, 2):
                flipped = closed_form(M_GE, n, -mu, z)
                assert flipped == pytest.approx((-1) ** n * closed_form(M_LE, n, mu, z), rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("mu", np.linspace(0.05, 0.85, 9).tolist())
    def test_sign_symmetry_u(self, mu):
        """Test p~n(-mu) = (-1)^n q~n(mu)."""
        for z in (0.5, 2.0):
            for n in (1, 2):
                flipped = closed_form(U_GE, n, -mu, z)
                assert flipped == pytest.approx((-1) ** n * closed_form(U_LE, n, mu, z), rel=1e-12, abs=1e-14)


class TestStandardForm:
    """Test the expansion of a standard Laplace form against mpmath."""

    def test_laplace_form(self):
        """Test f(s) = 1/(1+s), where F(x) = U(lam, lam, x)."""
        lam, x = 20.0, 40.0
        mu = lam / x
        a_m = [(-1.0) ** m / (1.0 + mu) ** (m + 1) for m in range(11)]
        sums = standard_form_expansion(a_m, lam, x, 4, "laplace")
        exact = float(mpmath.hyperu(lam, lam, x))

        errors = [abs(v / exact - 1.0) for v in sums]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 1e-3
        assert errors[3] < 1e-5

    def test_loop_signs(self):
        """Test the loop form alternates the terms."""
        a_m = [1.0, 0.0, 1.0, 0.0, 0.0]
        laplace = standard_form_expansion(a_m, 2.0, 4.0, 2, "laplace")
        loop = standard_form_expansion(a_m, 2.0, 4.0, 2, "loop")
        assert laplace[1] / laplace[0] == pytest.approx(1.0 + 0.5 / 4.0)
        assert loop[1] / loop[0] == pytest.approx(1.0 - 0.5 / 4.0)

    def test_rejects_bad_input(self):
        """Test lam, x and kind are validated."""
        with pytest.raises(DomainError):
            standard_form_expansion([1.0], -1.0, 4.0, 1)
        with pytest.raises(DomainError):
            standard_form_expansion([1.0], 1.0, 4.0, 1, "mellin")
        with pytest.raises(OrderOverflowError):
            standard_form_expansion([1.0] * 13, 1.0, 4.0, 7)
