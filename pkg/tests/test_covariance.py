"""Tests for the three-region covariance check and its special forms."""
import math

import numpy as np
import pytest

from algebra.atoms import pair
from algebra.covariance import (
    check_commutativity,
    check_covariance,
    check_orthogonality_sufficient,
    check_rank_one,
    commutator_norm,
    is_kernel_zero,
    kernel_norm,
    monomial_direct_residual,
)
from algebra.errors import NumericalError
from algebra.operator_core import compose
from algebra.trig import trig_four_term
from models.atoms import FunctionAtom, Interval, PairingConfig
from models.operators import KernelSum, Polynomial, SeparableOperator

_CFG = PairingConfig()
_UNIT = Interval(lo=0.0, hi=1.0)
_SQUARE = Polynomial.monomial(1.0, 2)


def _iv(lo, hi) -> Interval:
    return Interval(lo=lo, hi=hi)


def _rank_one(a, c, coeff, domain, support) -> SeparableOperator:
    return SeparableOperator(left=(a,), coeff=((coeff,),), right=(c,), domain=domain, left_support=support)


def _random_atom(rng: np.random.Generator) -> FunctionAtom:
    kind = str(rng.choice(["sin", "cos", "monomial", "constant"]))
    if kind == "monomial":
        return FunctionAtom.monomial(int(rng.integers(1, 3)))
    if kind == "constant":
        return FunctionAtom.constant()
    return FunctionAtom(kind=kind, omega=float(rng.uniform(0.5, 3.0)))


def _signed(rng: np.random.Generator) -> float:
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))


# ---------------------------------------------------------------------------
# General check
# ---------------------------------------------------------------------------

class TestCheckCovariance:
    def test_projection_relation_holds(self, projection_ops):
        A, B = projection_ops
        report = check_covariance(A, B, _SQUARE)
        assert report.holds
        assert report.passed
        assert report.method == "general"
        assert max(report.residual_on_G, report.residual_on_GA_minus_G, report.residual_on_GB_minus_G) < 1e-20
        assert report.violated_conditions == []

    def test_perturbed_projection_fails_on_G(self, projection_ops):
        A, B = projection_ops
        perturbed = A.with_matrix(np.array([[1.1, 0.0], [0.0, 1.0]]))
        report = check_covariance(perturbed, B, _SQUARE)
        assert not report.holds
        # residual kernel 0.11·(-6t)(4s-3): 0.0121 · 12 · 7/3
        assert report.residual_on_G == pytest.approx(0.0121 * 28.0, rel=1e-9)
        assert report.violated_conditions == [1]

    def test_laurent_relation_holds_for_any_delta(self, laurent_ops):
        A, B = laurent_ops
        for delta in (-1.7, 0.6, 2.0):
            assert check_covariance(A, B, Polynomial.monomial(delta, 2)).holds

    def test_condition_three_attributed_to_GB_minus_G(self, projection_ops):
        A, _ = projection_ops
        tail = FunctionAtom.constant(restriction=_iv(1.0, 2.0))
        B = _rank_one(FunctionAtom.monomial(1, scale=-6.0), tail, 1.0, _iv(0.0, 2.0), _UNIT)
        report = check_covariance(A, B, Polynomial(coeffs=(0.0, 0.4)))
        assert not report.holds
        assert report.residual_on_G < 1e-20
        assert report.residual_on_GA_minus_G == 0.0
        assert report.residual_on_GB_minus_G == pytest.approx(12.0, rel=1e-12)
        assert report.violated_conditions == [3]

    def test_condition_two_attributed_to_GA_minus_G(self, projection_ops):
        P, _ = projection_ops
        tail = FunctionAtom.constant(restriction=_iv(1.0, 2.0))
        A = _rank_one(FunctionAtom.monomial(1, scale=-6.0), tail, 1.0, _iv(0.0, 2.0), _UNIT)
        report = check_covariance(A, P, Polynomial())
        assert report.violated_conditions == [2]
        assert report.residual_on_GA_minus_G == pytest.approx(12.0, rel=1e-12)

    def test_threshold_convention(self, projection_ops):
        A, B = projection_ops
        report = check_covariance(A, B, _SQUARE, tol=1e-6)
        assert report.tolerance_used == 1e-6
        assert report.threshold == pytest.approx((1e-6 * (1.0 + report.scale)) ** 2)

    def test_tol_must_be_positive(self, projection_ops):
        A, B = projection_ops
        with pytest.raises(ValueError):
            check_covariance(A, B, _SQUARE, tol=0.0)

    def test_grid_disagreement_raises(self, projection_ops, mocker):
        A, B = projection_ops
        mocker.patch("algebra.covariance.GRID_TOL", -1.0)
        with pytest.raises(NumericalError):
            check_covariance(A, B, _SQUARE)

    def test_disjoint_domains(self, projection_ops):
        A, B = projection_ops
        far = B.model_copy(update={"domain": _iv(5.0, 6.0)})
        report = check_covariance(A, far, _SQUARE)
        # B·F(A) pairs over G_B ∩ X = ∅, so only AB on G_B remains
        assert report.residual_on_G == 0.0
        assert report.violated_conditions == [3]


# ---------------------------------------------------------------------------
# Rank one
# ---------------------------------------------------------------------------

class TestCheckRankOne:
    def test_rejects_higher_rank(self, projection_ops):
        A, B = projection_ops
        with pytest.raises(ValueError):
            check_rank_one(A, B, _SQUARE)

    def test_holding_instance_reports_constants(self):
        a, c = FunctionAtom.sin(1.0), FunctionAtom.cos(0.5)
        G = _iv(0.0, 2.0)
        alpha = 1.5
        q = pair(c, a, G, _CFG)
        A = _rank_one(a, c, alpha, G, G)
        B = _rank_one(a, c, -0.8, G, G)
        report = check_rank_one(A, B, Polynomial.monomial(1.0 / (alpha * q), 2))
        assert report.holds
        assert report.method == "rank_one"
        assert {"k1", "k2", "q", "lambda"} <= set(report.details)
        assert report.details["q"] == pytest.approx(alpha * q)

    def test_verdict_agrees_with_general_check(self):
        rng = np.random.default_rng(0)
        for trial in range(200):
            a, c = _random_atom(rng), _random_atom(rng)
            if trial % 2 == 0:
                G_A = G_B = _iv(-1.0, 1.0)
                q = pair(c, a, G_A, _CFG)
                alpha, beta = _signed(rng), _signed(rng)
                if abs(q) < 0.1:
                    continue
                A = _rank_one(a, c, alpha, G_A, G_A)
                B = _rank_one(a, c, beta, G_B, G_B)
                F = Polynomial.monomial(1.0 / (alpha * q), 2)
            else:
                G_A = _iv(0.0, float(rng.uniform(0.5, 1.5)))
                G_B = _iv(0.0, float(rng.uniform(0.5, 1.5)))
                A = _rank_one(a, c, _signed(rng), G_A, _iv(0.0, 2.0))
                B = _rank_one(_random_atom(rng), _random_atom(rng), _signed(rng), G_B, _iv(0.0, 2.0))
                F = Polynomial(coeffs=(float(rng.uniform(-1.0, 1.0)), 0.0, _signed(rng)))
            assert check_rank_one(A, B, F).holds == check_covariance(A, B, F).holds


# ---------------------------------------------------------------------------
# Orthogonality and commutativity
# ---------------------------------------------------------------------------

class TestOrthogonality:
    def _pair(self):
        G = _iv(0.0, 2.0)
        A = _rank_one(FunctionAtom.sin(math.pi), FunctionAtom.sin(math.pi), 1.3, G, G)
        B = _rank_one(FunctionAtom.cos(math.pi), FunctionAtom.cos(math.pi), -0.4, G, G)
        return A, B

    def test_orthogonal_terms_give_zero_products(self):
        A, B = self._pair()
        assert check_orthogonality_sufficient(A, B, 2)
        assert check_covariance(A, B, Polynomial.monomial(3.0, 2)).holds

    def test_overlapping_terms(self):
        A, _ = self._pair()
        assert not check_orthogonality_sufficient(A, A, 2)

    def test_argument_errors(self):
        A, B = self._pair()
        with pytest.raises(ValueError):
            check_orthogonality_sufficient(A, B, 0)
        with pytest.raises(ValueError):
            check_orthogonality_sufficient(A, B.model_copy(update={"domain": _iv(0.0, 1.0)}), 2)


class TestCommutativity:
    _G = _iv(-1.0, 1.0)
    _X = _iv(-1.5, 1.5)

    def test_operator_commutes_with_itself(self):
        A = trig_four_term((0.5, 1.0, -0.7, 0.2), 1.3, self._G, self._X)
        report = check_commutativity(A, A)
        assert report.holds
        assert report.method == "commutativity"
        assert set(report.details) == {"commutator_SS", "commutator_SC", "commutator_CS", "commutator_CC"}

    def test_generic_pair_does_not_commute(self):
        A = trig_four_term((0.5, 1.0, -0.7, 0.2), 1.3, self._G, self._X)
        B = trig_four_term((1.1, -0.3, 0.4, 0.9), 1.3, self._G, self._X)
        report = check_commutativity(A, B)
        assert not report.holds
        assert report.details["commutator_SS"] != 0.0
        assert commutator_norm(A, B) > 1e-3

    def test_non_trig_operators_skip_closed_form(self, projection_ops):
        A, B = projection_ops
        report = check_commutativity(A, B)
        assert report.holds
        assert not any(k.startswith("commutator_") for k in report.details)

    def test_closed_form_disagreement_raises(self, mocker):
        A = trig_four_term((0.5, 1.0, -0.7, 0.2), 1.3, self._G, self._X)
        mocker.patch("algebra.covariance.trig_commutes", return_value=False)
        with pytest.raises(NumericalError, match="disagrees"):
            check_commutativity(A, A)


# ---------------------------------------------------------------------------
# Kernel helpers
# ---------------------------------------------------------------------------

class TestKernelHelpers:
    def test_empty_sum_is_zero(self):
        assert is_kernel_zero(KernelSum())
        assert kernel_norm(KernelSum()) == 0.0

    def test_kernel_norm(self, projection_ops):
        A, _ = projection_ops
        # ‖-6t(4s-3)‖² + ‖12t²(3s-2)‖² + cross terms = ‖A‖²
        expected = math.sqrt(sum(
            pair(f, g, _UNIT, _CFG) * pair(u, v, _UNIT, _CFG)
            for f, u in zip(A.left, A.right) for g, v in zip(A.left, A.right)
        ))
        assert kernel_norm(KernelSum.of((1, A))) == pytest.approx(expected, rel=1e-12)

    def test_direct_residual_matches_functional_calculus(self, projection_ops):
        A, B = projection_ops
        assert kernel_norm(monomial_direct_residual(A, B, 1.0, 2)) < 1e-12
        assert is_kernel_zero(KernelSum.of((1, compose(A, B)), (1, A)))
