"""Property tests for the pairing and the σ closed forms."""
import math

import numpy as np
from hypothesis import given, settings as hyp_settings, strategies as st

from algebra.atoms import pair, sigma1, sigma2
from algebra.quadrature import quadrature
from models.atoms import CompoundFunction, FunctionAtom, Interval, PairingConfig

_CFG = PairingConfig()

_omegas = st.floats(min_value=-6.0, max_value=6.0, allow_nan=False)
_scales = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


@st.composite
def _intervals(draw):
    lo = draw(st.floats(min_value=-3.0, max_value=3.0))
    width = draw(st.floats(min_value=0.0, max_value=3.0))
    return Interval(lo=lo, hi=lo + width)


@st.composite
def _trig_atoms(draw):
    kind = draw(st.sampled_from(["constant", "sin", "cos"]))
    scale = draw(_scales)
    if kind == "constant":
        return FunctionAtom.constant(scale=scale)
    return FunctionAtom(kind=kind, omega=draw(_omegas), scale=scale)


@st.composite
def _power_atoms(draw):
    k = draw(st.integers(min_value=0, max_value=4))
    return FunctionAtom.monomial(k, scale=draw(_scales))


_atoms = st.one_of(_trig_atoms(), _power_atoms())


@given(u=_atoms, v=_atoms, G=_intervals())
@hyp_settings(deadline=None)
def test_pairing_is_symmetric(u, v, G):
    assert math.isclose(pair(u, v, G, _CFG), pair(v, u, G, _CFG), rel_tol=1e-12, abs_tol=1e-12)


@given(u=_atoms, v=_atoms, w=_atoms, a=_scales, G=_intervals())
@hyp_settings(deadline=None)
def test_pairing_is_bilinear(u, v, w, a, G):
    combo = CompoundFunction(terms=(u.with_scale(a * u.scale), v))
    expected = a * pair(u, w, G, _CFG) + pair(v, w, G, _CFG)
    scale = 1.0 + abs(a * pair(u, w, G, _CFG)) + abs(pair(v, w, G, _CFG))
    assert math.isclose(pair(combo, w, G, _CFG), expected, abs_tol=1e-12 * scale)


@given(u=_trig_atoms(), v=_trig_atoms(), G=_intervals())
@hyp_settings(max_examples=50, deadline=None)
def test_trig_closed_form_matches_quadrature(u, v, G):
    quad = pair(u, v, G, PairingConfig(method="quadrature_only"))
    assert math.isclose(pair(u, v, G, _CFG), quad, abs_tol=1e-10 * (1.0 + abs(quad)))


@given(omega=st.floats(min_value=0.1, max_value=5.0), G=_intervals())
@hyp_settings(max_examples=100, deadline=None)
def test_sigmas_match_quadrature_and_sum_to_width(omega, G):
    s1 = sigma1(omega, G.lo, G.hi)
    s2 = sigma2(omega, G.lo, G.hi)
    q1 = quadrature(lambda s: np.sin(omega * s) ** 2, G, _CFG)
    assert math.isclose(s1, q1, abs_tol=1e-10)
    assert math.isclose(s1 + s2, G.hi - G.lo, abs_tol=4 * np.finfo(float).eps * (1.0 + G.hi - G.lo))
