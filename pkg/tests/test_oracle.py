"""
Tests for the extended-precision reference values of M and U.
"""

import math

import mpmath
import pytest

from modules.errors import DomainError
from modules.oracle import OracleModule, laplace_u, oracle_log, oracle_M, oracle_U
from modules.regimes import Function


@pytest.fixture
def config():
    """Oracle configuration."""
    return {"precision_digits": 40, "quad_max_level": 12}


def _rel(x, y):
    return abs(x / y - 1)


class TestOracleM:
    """Test M(a, b, z) by its power series."""

    def test_equal_parameters(self):
        """Test M(1, 1, 1) = e and M(50, 50, 3) = e^3."""
        r = oracle_M(1, 1, 1, P=40)
        mp = r.value.context
        assert _rel(r.value, mp.e) < mp.mpf(10) ** -39
        r = oracle_M(50, 50, 3, P=40)
        assert _rel(r.value, r.value.context.exp(3)) < mpmath.mpf(10) ** -39

    def test_known_value(self):
        """Test M(1, 2, 1) = e - 1."""
        r = oracle_M(1, 2, 1, P=50)
        mp = r.value.context
        assert _rel(r.value, mp.e - 1) < mp.mpf(10) ** -49
        assert r.route == "series"
        assert r.digits == 49

    def test_precision_doubling(self):
        """Test values at P and 2P digits agree to P digits."""
        low = oracle_M(30, 20, 2, P=40)
        high = oracle_M(30, 20, 2, P=80)
        assert _rel(low.value, high.value) < mpmath.mpf(10) ** -39

    def test_monotone_in_z(self):
        """Test M(a, b, z) grows with z."""
        values = [oracle_M(3, 5, z, P=30).value for z in (0.5, 1.0, 2.0, 4.0)]
        assert values == sorted(values)

    def test_log_value(self):
        """Test the log of a huge value stays finite."""
        r = oracle_M(1000, 1000, 900, P=30)
        assert r.log_value == pytest.approx(900.0, rel=1e-14)

    @pytest.mark.parametrize("a,b,z", [(-1, 1, 1), (1, 0, 1), (1, 1, math.nan)])
    def test_rejects_invalid(self, a, b, z):
        """Test non-positive or non-finite parameters."""
        with pytest.raises(DomainError):
            oracle_M(a, b, z)

    def test_rejects_low_precision(self):
        """Test P below 30 digits."""
        with pytest.raises(DomainError):
            oracle_M(1, 1, 1, P=20)


class TestOracleU:
    """Test U by quadrature and by the connection formula."""

    def test_equal_parameters(self):
        """Test U(a, a+1, z) = z^(-a) on the connection route."""
        r = oracle_U(10, 10, 2, P=40)
        assert r.route == "connection"
        assert r.perturbation > 0.0
        assert _rel(r.value, r.value.context.mpf(2) ** -10) < mpmath.mpf(10) ** -30

    def test_simple_value(self):
        """Test U(1, 2, 3) = 1/3."""
        r = oracle_U(1, 1, 3, P=40)
        assert _rel(r.value, r.value.context.mpf(1) / 3) < mpmath.mpf(10) ** -30

    def test_kummer_relation(self):
        """Test U(a, b, z) = z^(1-b) U(a-b+1, 2-b, z) at (12, 4, 2) by quadrature."""
        P = 40
        left = laplace_u(12, 4, 2, P).value
        right = laplace_u(9, -2, 2, P).value
        right *= right.context.mpf(2) ** -3
        assert _rel(left, right) < mpmath.mpf(10) ** (10 - P)

    def test_routes_agree(self):
        """Test quadrature and connection just below b = a."""
        P = 40
        quadrature = oracle_U(20, 19.5, 1.5, P, route="quadrature")
        connection = oracle_U(20, 19.5, 1.5, P, route="connection")
        assert quadrature.route == "quadrature"
        assert connection.route == "connection"
        assert _rel(quadrature.value, connection.value) < mpmath.mpf(10) ** (10 - P)

    def test_matches_mpmath(self):
        """Test the quadrature route against mpmath.hyperu."""
        r = oracle_U(8, 3.5, 1.25, P=30)
        with mpmath.workdps(50):
            expected = mpmath.hyperu(8, 4.5, 1.25)
            assert _rel(r.value, expected) < mpmath.mpf(10) ** -24

    def test_precision_doubling(self):
        """Test the quadrature route at P and 2P digits."""
        low = oracle_U(30, 12, 2, P=30)
        high = oracle_U(30, 12, 2, P=60)
        assert _rel(low.value, high.value) < mpmath.mpf(10) ** -24

    def test_quadrature_needs_b_below_a(self):
        """Test the quadrature route rejects b >= a."""
        with pytest.raises(DomainError):
            oracle_U(5, 6, 1, route="quadrature")

    def test_unknown_route(self):
        """Test an unknown route name."""
        with pytest.raises(DomainError):
            oracle_U(5, 6, 1, route="series")


class TestOracleModule:
    """Test the configured oracle."""

    def test_init(self, config):
        """Test the configured precision."""
        oracle = OracleModule(config)
        assert oracle.precision == 40
        assert oracle.max_level == 12

    def test_rejects_low_precision(self, config):
        """Test precision_digits below 30."""
        with pytest.raises(DomainError):
            OracleModule({**config, "precision_digits": 10})

    def test_evaluate(self, config):
        """Test evaluate and log_value for both functions."""
        oracle = OracleModule(config)
        assert oracle.evaluate(Function.M, 2, 2, 1.5).log_value == pytest.approx(1.5, rel=1e-14)
        assert oracle.log_value(Function.U, 3, 3, 2) == pytest.approx(-3 * math.log(2), rel=1e-14)
        assert oracle_log(Function.U, 3, 3, 2, P=30) == pytest.approx(-3 * math.log(2), rel=1e-14)

    def test_record(self, config):
        """Test the JSON-ready record."""
        record = OracleModule(config).evaluate("M", 1, 2, 1).to_record()
        assert set(record) == {"value", "log_value", "digits", "route", "perturbation"}
        assert record["value"].startswith("1.718281828459045235")
        assert record["route"] == "series"
