import math

import pytest

from utils.expressions import affine_coefficients, evaluate_expression, parse_expression


class TestParseExpression:
    def test_known_names(self):
        expr = parse_expression("1/(delta*sigma2)", ["delta", "sigma2"])
        assert {s.name for s in expr.free_symbols} == {"delta", "sigma2"}

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown names"):
            parse_expression("a1 + zeta", ["a1"])

    def test_syntax_error_rejected(self):
        with pytest.raises(ValueError, match="cannot parse"):
            parse_expression("a1 +* 2", ["a1"])

    def test_greek_names_stay_symbols(self):
        expr = parse_expression("beta + gamma", ["beta", "gamma"])
        assert {s.name for s in expr.free_symbols} == {"beta", "gamma"}

    def test_constants_available(self):
        assert parse_expression("2*ln2", []).free_symbols == set()


class TestEvaluateExpression:
    def test_value(self):
        assert evaluate_expression("-2*ln2*ga2", {"ga2": 1.5}) == pytest.approx(-3.0 * math.log(2.0))

    def test_numbers_pass_through(self):
        assert evaluate_expression(0.25, {}) == 0.25

    def test_division_by_zero(self):
        with pytest.raises(ValueError):
            evaluate_expression("1/(delta*sigma1)", {"delta": 1.0, "sigma1": 0.0})

    def test_abs(self):
        assert evaluate_expression("a1*(Abs(b3) + Abs(b4))", {"a1": 2.0, "b3": -1.0, "b4": 0.5}) == pytest.approx(3.0)


class TestAffineCoefficients:
    def test_affine_split(self):
        constant, slopes = affine_coefficients("2*x - y + 3", ("x", "y"))
        assert constant == pytest.approx(3.0)
        assert slopes == pytest.approx((2.0, -1.0))

    def test_number(self):
        assert affine_coefficients(1.5, ("x",)) == (1.5, (0.0,))

    def test_nonlinear_rejected(self):
        with pytest.raises(ValueError, match="not affine"):
            affine_coefficients("x*y", ("x", "y"))

    def test_non_polynomial_rejected(self):
        with pytest.raises(ValueError):
            affine_coefficients("sin(x)", ("x",))
