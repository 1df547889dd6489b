"""Arithmetic expressions for registry entries and operator templates.

Expressions are short strings such as ``"1/(delta*sigma2)"`` or
``"-2*ln2*g2"``.  They are parsed with sympy against an explicit list of
names, so that identifiers like ``gamma`` or ``beta`` never resolve to sympy
functions.  ``ln2`` and ``pi`` are always available.
"""
import logging
from collections.abc import Callable, Iterable, Mapping
from functools import lru_cache

import sympy

logger = logging.getLogger(__name__)

_CONSTANTS = {"ln2": sympy.log(2), "pi": sympy.pi}


def parse_expression(text: str | float | int, names: Iterable[str]) -> sympy.Expr:
    """Parse ``text`` into a sympy expression over ``names``.

    Raises ValueError for syntax errors and for names outside ``names``.
    """
    names = tuple(names)
    local = {name: sympy.Symbol(name) for name in names}
    local.update(_CONSTANTS)
    try:
        expr = sympy.sympify(text, locals=local)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from exc
    unknown = {s.name for s in expr.free_symbols} - set(names)
    if unknown:
        raise ValueError(f"expression {text!r} uses unknown names {sorted(unknown)}")
    return expr


@lru_cache(maxsize=4096)
def compile_expression(text: str, names: tuple[str, ...]) -> Callable[..., float]:
    expr = parse_expression(text, names)
    return sympy.lambdify([sympy.Symbol(n) for n in names], expr, modules="math")


def evaluate_expression(text: str | float | int, values: Mapping[str, float]) -> float:
    """Numeric value of ``text`` with the given name → value bindings."""
    if isinstance(text, (int, float)):
        return float(text)
    names = tuple(sorted(values))
    fn = compile_expression(text, names)
    try:
        return float(fn(*(values[n] for n in names)))
    except ZeroDivisionError as exc:
        raise ValueError(f"expression {text!r} divides by zero at {dict(values)}") from exc


@lru_cache(maxsize=4096)
def affine_coefficients(text: str | float | int, params: tuple[str, ...]) -> tuple[float, tuple[float, ...]]:
    """Split an affine expression into (constant, coefficient per parameter).

    Raises ValueError when the expression is not affine in ``params``.
    """
    expr = parse_expression(text, params)
    symbols = [sympy.Symbol(p) for p in params]
    if symbols and expr.free_symbols:
        try:
            degree = sympy.Poly(expr, *symbols).total_degree()
        except sympy.PolynomialError as exc:
            raise ValueError(f"coefficient {text!r} is not affine in {list(params)}") from exc
        if degree > 1:
            raise ValueError(f"coefficient {text!r} is not affine in {list(params)} (degree {degree})")
    constant = float(expr.subs({s: 0 for s in symbols}))
    slopes = tuple(float(sympy.diff(expr, s)) for s in symbols)
    return constant, slopes
