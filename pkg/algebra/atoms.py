"""Atom evaluation and the pairing Q_G(u, v) = ∫_G u(t) v(t) dt.

Closed forms are used when both factors are trigonometric (constant, sin, cos)
or both are power laws (constant, monomial, Laurent); every other product is
integrated by composite Gauss–Legendre.  Pairings of compound functions are
sums of atom pairings.
"""
import logging
import math
from functools import lru_cache

import numpy as np

from algebra.errors import DomainError
from algebra.quadrature import quadrature
from models.atoms import (
    CompoundFunction,
    FunctionAtom,
    Interval,
    PairingConfig,
    atom_terms,
    intersect_all,
)

logger = logging.getLogger(__name__)

# Frequencies closer than this are treated as resonant (ω_u = ±ω_v).
_RESONANCE_EPS = 1e-12

FunctionLike = FunctionAtom | CompoundFunction


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _base_values(atom: FunctionAtom, t: np.ndarray) -> np.ndarray:
    if atom.kind == "constant":
        return np.ones_like(t)
    if atom.kind == "sin":
        return np.sin(atom.omega * t)
    if atom.kind == "cos":
        return np.cos(atom.omega * t)
    if atom.kind == "monomial":
        return t ** atom.exponent
    if np.any(t == 0.0):
        raise DomainError(f"t^-{atom.exponent} is not defined at t = 0")
    return 1.0 / t ** atom.exponent


def _evaluate_atom(atom: FunctionAtom, t: np.ndarray) -> np.ndarray:
    if atom.restriction is None:
        return atom.scale * _base_values(atom, t)
    if atom.kind == "laurent" and np.any(t == 0.0):
        raise DomainError(f"t^-{atom.exponent} is not defined at t = 0")
    inside = (t >= atom.restriction.lo) & (t <= atom.restriction.hi)
    values = np.zeros_like(t)
    values[inside] = atom.scale * _base_values(atom, t[inside])
    return values


def evaluate(f: FunctionLike, t: float | np.ndarray) -> float | np.ndarray:
    """Value of f at t: scale·base(t) inside the restriction, 0 outside.

    Accepts a scalar or an array; returns the same shape.  Raises DomainError
    for a Laurent atom at t = 0.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    total = np.zeros_like(t_arr)
    for atom in atom_terms(f):
        total = total + _evaluate_atom(atom, t_arr)
    if np.ndim(t) == 0:
        return float(total[0])
    return total.reshape(np.shape(t))


def sup_norm(f: FunctionLike, interval: Interval | None) -> float:
    """Upper bound for sup |f| on interval ∩ restriction (exact for single atoms)."""
    total = 0.0
    for atom in atom_terms(f):
        region = intersect_all(interval, atom.restriction)
        if region is None:
            continue
        if atom.kind in ("constant", "sin", "cos"):
            bound = 1.0
        elif atom.kind == "monomial":
            bound = max(abs(region.lo), abs(region.hi)) ** atom.exponent
        else:
            bound = 1.0 / min(abs(region.lo), abs(region.hi)) ** atom.exponent
        total += abs(atom.scale) * bound
    return total


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _int_cos(c: float, G: Interval) -> float:
    """∫_G cos(c t) dt, stable for small c."""
    w = G.length
    return w * math.cos(c * 0.5 * (G.lo + G.hi)) * float(np.sinc(c * w / (2.0 * math.pi)))


def _int_sin(c: float, G: Interval) -> float:
    """∫_G sin(c t) dt, stable for small c."""
    w = G.length
    return w * math.sin(c * 0.5 * (G.lo + G.hi)) * float(np.sinc(c * w / (2.0 * math.pi)))


def _snap(c: float) -> float:
    return 0.0 if abs(c) < _RESONANCE_EPS else c


def _trig_form(atom: FunctionAtom) -> tuple[str, float]:
    if atom.kind == "constant":
        return "cos", 0.0
    return atom.kind, atom.omega


def _trig_product_integral(u: FunctionAtom, v: FunctionAtom, G: Interval) -> float:
    ku, a = _trig_form(u)
    kv, b = _trig_form(v)
    diff, total = _snap(a - b), _snap(a + b)
    if ku == "cos" and kv == "cos":
        return 0.5 * (_int_cos(diff, G) + _int_cos(total, G))
    if ku == "sin" and kv == "sin":
        return 0.5 * (_int_cos(diff, G) - _int_cos(total, G))
    if ku == "sin":
        # sin(a t) cos(b t)
        return 0.5 * (_int_sin(total, G) + _int_sin(diff, G))
    # cos(a t) sin(b t)
    return 0.5 * (_int_sin(total, G) - _int_sin(diff, G))


def _power_product_integral(u: FunctionAtom, v: FunctionAtom, G: Interval) -> float:
    p = u.power + v.power
    if p < 0 and not G.excludes_zero:
        raise DomainError(f"t^{p} is not integrable over [{G.lo}, {G.hi}]")
    if p == -1:
        return math.log(G.hi / G.lo)
    return (G.hi ** (p + 1) - G.lo ** (p + 1)) / (p + 1)


def _sort_key(atom: FunctionAtom) -> tuple:
    return (atom.kind, atom.omega if atom.omega is not None else 0.0, atom.exponent or 0)


@lru_cache(maxsize=65536)
def _pair_unit(u: FunctionAtom, v: FunctionAtom, G: Interval, cfg: PairingConfig) -> float:
    """Pairing of two unit-scale, unrestricted atoms over a non-degenerate G."""
    if _sort_key(v) < _sort_key(u):
        u, v = v, u
    if cfg.method == "closed_form_first":
        if u.is_trig and v.is_trig:
            return _trig_product_integral(u, v, G)
        if u.is_power and v.is_power:
            return _power_product_integral(u, v, G)
        logger.debug("No closed form for %s × %s, using quadrature", u.kind, v.kind)
    if (u.kind == "laurent" or v.kind == "laurent") and not G.excludes_zero:
        raise DomainError(f"Laurent integrand is singular on [{G.lo}, {G.hi}]")
    return quadrature(lambda t: _base_values(u, t) * _base_values(v, t), G, cfg)


def _unit(atom: FunctionAtom) -> FunctionAtom:
    if atom.scale == 1.0 and atom.restriction is None:
        return atom
    return atom.model_copy(update={"scale": 1.0, "restriction": None})


def pair(u: FunctionLike, v: FunctionLike, G: Interval | None, cfg: PairingConfig) -> float:
    """Q_G(u, v) over G ∩ restriction(u) ∩ restriction(v); 0 on an empty domain."""
    total = 0.0
    for x in atom_terms(u):
        for y in atom_terms(v):
            domain = intersect_all(G, x.restriction, y.restriction)
            if domain is None or domain.is_degenerate:
                continue
            total += x.scale * y.scale * _pair_unit(_unit(x), _unit(y), domain, cfg)
    return total


# ---------------------------------------------------------------------------
# Trigonometric σ constants
# ---------------------------------------------------------------------------

def sigma1(omega: float, alpha1: float, beta1: float) -> float:
    """∫_{α1}^{β1} sin²(ω s) ds in closed form (0 when ω = 0)."""
    if alpha1 > beta1:
        raise ValueError(f"sigma1 needs alpha1 <= beta1, got [{alpha1}, {beta1}]")
    if omega == 0.0:
        return 0.0
    width = beta1 - alpha1
    return width / 2.0 - math.cos(omega * (alpha1 + beta1)) * math.sin(omega * width) / (2.0 * omega)


def sigma2(omega: float, alpha1: float, beta1: float) -> float:
    """∫_{α1}^{β1} cos²(ω s) ds = (β1 − α1) − σ1."""
    return (beta1 - alpha1) - sigma1(omega, alpha1, beta1)


# ---------------------------------------------------------------------------
# Normal form
# ---------------------------------------------------------------------------

def canonical_atom(atom: FunctionAtom) -> tuple[FunctionAtom | None, float]:
    """Split an atom into (unit-scale representative, factor).

    Sin(-ω) becomes -Sin(ω), Cos(-ω) becomes Cos(ω), Cos(0) becomes Constant and
    Sin(0) is identically zero (representative None).  The restriction is kept.
    """
    factor = atom.scale
    if atom.kind == "sin":
        if atom.omega == 0.0:
            return None, 0.0
        if atom.omega < 0.0:
            return FunctionAtom.sin(-atom.omega, restriction=atom.restriction), -factor
    elif atom.kind == "cos":
        if atom.omega == 0.0:
            return FunctionAtom.constant(restriction=atom.restriction), factor
        if atom.omega < 0.0:
            return FunctionAtom.cos(-atom.omega, restriction=atom.restriction), factor
    return atom.with_scale(1.0), factor
