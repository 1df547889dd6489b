import math

import numpy as np
import pytest

from algebra.errors import NumericalError
from algebra.quadrature import composite_gauss_legendre, quadrature
from models.atoms import Interval, PairingConfig


def test_polynomial_exact_with_one_panel():
    # 2n − 1 = 3 for n = 2 nodes
    assert composite_gauss_legendre(lambda t: t ** 3 + t ** 2, 0.0, 2.0, 2, 1) == pytest.approx(4.0 + 8.0 / 3.0)


def test_adaptive_oscillatory():
    cfg = PairingConfig()
    assert quadrature(lambda t: np.sin(20.0 * t) ** 2, Interval(lo=0.0, hi=math.pi), cfg) == pytest.approx(math.pi / 2, abs=1e-12)


def test_degenerate_interval_is_zero():
    assert quadrature(lambda t: np.ones_like(t), Interval(lo=1.0, hi=1.0), PairingConfig()) == 0.0
    assert quadrature(lambda t: np.ones_like(t), None, PairingConfig()) == 0.0


def test_non_convergence_raises_with_diagnostics():
    cfg = PairingConfig(quad_nodes=2, quad_tol=1e-15, max_depth=1)
    with pytest.raises(NumericalError) as exc_info:
        quadrature(lambda t: np.sin(50.0 * t), Interval(lo=0.0, hi=3.0), cfg)
    message = str(exc_info.value)
    assert "panels" in message
    assert "tolerance" in message


def test_non_finite_integrand_raises():
    with pytest.raises(NumericalError):
        composite_gauss_legendre(lambda t: np.full_like(t, np.nan), 0.0, 1.0, 4, 1)


def test_too_few_nodes_rejected():
    with pytest.raises(ValueError):
        composite_gauss_legendre(lambda t: t, 0.0, 1.0, 1, 1)
