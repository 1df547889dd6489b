"""Instantiate and verify registered solution families.

Reads:  data/families.json (FamilyRegistry)

Free parameters are drawn as sign·U[0.5, 2]; geometry (interval, frequency,
support) is drawn per setting.  Any drawn value can be overridden by name:
a free parameter, ``delta``, ``L``, ``omega``, ``shift``, ``alpha``, ``beta``
or, for the coefficient model, ``sigma1``.
"""
import logging
import math
from functools import lru_cache
from pathlib import Path

import numpy as np

from algebra.covariance import check_covariance, is_kernel_zero, kernel_norm
from algebra.operator_core import commutator, compose, power, scale_operator
from algebra.trig import coefficient_model_residual, sigma_pair_matrix, theta_matrix, trig_four_term, trig_sigmas
from models.atoms import CompoundFunction, FunctionAtom, Interval, PairingConfig
from models.families import CONSTANT_NAMES, Family, FamilyRegistry
from models.operators import KernelSum, Polynomial, SeparableOperator
from models.reports import CovarianceReport
from utils.expressions import evaluate_expression, parse_expression

logger = logging.getLogger(__name__)

_DATA_DIR = Path(__file__).resolve().parent.parent / "data"

_DEFAULT_CFG = PairingConfig()

# Drawn values must keep every ``avoid`` expression at least this far from 0.
_AVOID_MARGIN = 0.1
_MIN_SIGMA = 0.1
_MAX_DRAWS = 200
_COMMUTE_TOL = 1e-9


@lru_cache(maxsize=4)
def load_registry(path: Path = _DATA_DIR / "families.json") -> FamilyRegistry:
    return FamilyRegistry.load(path)


# ---------------------------------------------------------------------------
# Worked operators
# ---------------------------------------------------------------------------

def _linear(slope: float, offset: float) -> CompoundFunction:
    return CompoundFunction(terms=(FunctionAtom.monomial(1, scale=slope), FunctionAtom.constant(scale=offset)))


def projection_pair(
    mu: float = 1.0,
    support: Interval = Interval(lo=0.0, hi=1.0),
) -> tuple[SeparableOperator, SeparableOperator]:
    """Kernels -6t(4s-3) + 12t²(3s-2) and mu·(6t(4s-3) - 12t²(3s-2)) on [0, 1].

    The left and right functions are biorthogonal on [0, 1], so A² = A and
    AB = BA² = -mu·A whenever the support contains [0, 1].
    """
    domain = Interval(lo=0.0, hi=1.0)
    right = (_linear(4.0, -3.0), _linear(3.0, -2.0))
    a_left = (FunctionAtom.monomial(1, scale=-6.0), FunctionAtom.monomial(2, scale=12.0))
    b_left = (FunctionAtom.monomial(1, scale=6.0), FunctionAtom.monomial(2, scale=-12.0))
    A = SeparableOperator.from_matrix(a_left, np.eye(2), right, domain, support)
    B = SeparableOperator.from_matrix(b_left, mu * np.eye(2), right, domain, support)
    return A, B


def laurent_pair(
    gamma_a,
    gamma_b,
    support: Interval = Interval(lo=1.0, hi=2.0),
) -> tuple[SeparableOperator, SeparableOperator]:
    """Kernels in span{1, 1/t} ⊗ span{1, 1/s} on G = [1, 2].

    ``gamma_a`` = (γ0, γ1, γ2, γ3) gives γ0 + γ1/s + γ2/t + γ3/(ts); ``gamma_b``
    = (γ0, γ1, γ2, γ3) likewise (the worked example uses γ1/s + γ2/t for B).
    """
    domain = Interval(lo=1.0, hi=2.0)
    left = (FunctionAtom.constant(), FunctionAtom.laurent(1, restriction=support))
    right = (FunctionAtom.constant(), FunctionAtom.laurent(1, restriction=domain))
    A = SeparableOperator.from_matrix(left, np.reshape(np.asarray(gamma_a, dtype=float), (2, 2)), right, domain, support)
    B = SeparableOperator.from_matrix(left, np.reshape(np.asarray(gamma_b, dtype=float), (2, 2)), right, domain, support)
    return A, B


_CASE1_LEFT = (
    FunctionAtom.sin(2 * math.pi), FunctionAtom.cos(4 * math.pi),
    FunctionAtom.sin(6 * math.pi), FunctionAtom.cos(8 * math.pi),
)
_CASE1_RIGHT = (
    FunctionAtom.cos(10 * math.pi), FunctionAtom.cos(4 * math.pi),
    FunctionAtom.sin(6 * math.pi), FunctionAtom.sin(12 * math.pi),
)


def case1_operator(theta, shift: float = 0.0) -> SeparableOperator:
    """Σ θ_i a_i(t) c_i(s) over [shift, shift + 1] with integer-period trig atoms.

    Only a_2 ⟂̸ c_2 (cos 4π) and a_3 ⟂̸ c_3 (sin 6π) pair to nonzero values, both 1/2.
    """
    domain = Interval(lo=shift, hi=shift + 1.0)
    support = Interval(lo=shift - 0.5, hi=shift + 1.5)
    return SeparableOperator.from_matrix(_CASE1_LEFT, np.diag(np.asarray(theta, dtype=float)), _CASE1_RIGHT, domain, support)


# ---------------------------------------------------------------------------
# Drawing
# ---------------------------------------------------------------------------

def _signed_uniform(rng: np.random.Generator) -> float:
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))


def _draw_geometry(family: Family, rng: np.random.Generator, values: dict[str, float]) -> None:
    if family.setting == "case1":
        values.setdefault("shift", float(rng.uniform(-1.0, 1.0)))
        values["sigma1"] = values["sigma2"] = 0.5
    elif family.setting == "trig" and family.sigma == "zero-sigma2":
        values.setdefault("sigma1", float(rng.uniform(0.5, 2.0)))
        values["sigma2"] = 0.0
    elif family.setting == "trig":
        values.setdefault("L", float(rng.uniform(0.5, 2.0)))
        if family.sigma == "zero-sigma1":
            values["omega"] = 0.0
        values.setdefault("omega", float(rng.uniform(0.5, 3.0)))
        domain = _trig_domain(family, values)
        values["sigma1"], values["sigma2"] = trig_sigmas(values["omega"], domain)
    elif family.setting == "laurent":
        values.setdefault("alpha", float(rng.uniform(0.5, 1.0)))
        values.setdefault("beta", 2.0 + float(rng.uniform(0.0, 1.0)))
    else:
        values.setdefault("alpha", -float(rng.uniform(0.0, 0.5)))
        values.setdefault("beta", 1.0 + float(rng.uniform(0.0, 0.5)))


def _trig_domain(family: Family, values: dict[str, float]) -> Interval:
    L = values["L"]
    if family.sigma == "zero-both":
        return Interval(lo=L, hi=L)
    return Interval(lo=-L, hi=L)


def _draw_delta(family: Family, rng: np.random.Generator) -> float:
    if family.delta == "zero":
        return 0.0
    if family.delta == "one":
        return 1.0
    return _signed_uniform(rng)


def resolve_coefficients(family: Family, values: dict[str, float]) -> dict[str, float]:
    """Evaluate theta_a / theta_b in dependency order; returns name → value."""
    names = family.coefficient_names
    entries = dict(zip(names, [*family.theta_a, *family.theta_b]))
    known = {k: v for k, v in values.items() if k in set(family.free) | set(CONSTANT_NAMES)}
    resolved: dict[str, float] = {}
    pending = dict(entries)
    all_names = set(family.free) | set(CONSTANT_NAMES) | set(names)
    while pending:
        progress = False
        for name, entry in list(pending.items()):
            if isinstance(entry, (int, float)):
                resolved[name] = float(entry)
            else:
                needed = {s.name for s in parse_expression(entry, all_names).free_symbols}
                scope = {**resolved, **known}
                if not needed <= set(scope):
                    continue
                resolved[name] = evaluate_expression(entry, {n: scope[n] for n in needed})
            del pending[name]
            progress = True
        if not progress:
            raise ValueError(f"{family.id}: coefficients {sorted(pending)} depend on each other")
    return resolved


def _avoid_ok(family: Family, scope: dict[str, float]) -> bool:
    names = set(scope)
    for expr in family.avoid:
        needed = {s.name for s in parse_expression(expr, names).free_symbols}
        if abs(evaluate_expression(expr, {n: scope[n] for n in needed})) < _AVOID_MARGIN:
            return False
    return True


def draw_family_params(
    family: Family,
    rng: np.random.Generator,
    overrides: dict[str, float] | None = None,
) -> dict[str, float]:
    """Draw delta, geometry and free parameters until every constraint is met."""
    overrides = dict(overrides or {})
    for _ in range(_MAX_DRAWS):
        values = dict(overrides)
        values.setdefault("delta", _draw_delta(family, rng))
        for name in family.free:
            values.setdefault(name, _signed_uniform(rng))
        _draw_geometry(family, rng, values)
        if family.setting == "trig" and family.sigma == "generic":
            if min(values["sigma1"], values["sigma2"]) < _MIN_SIGMA:
                continue
        try:
            scope = {**values, **resolve_coefficients(family, values)}
            if _avoid_ok(family, scope):
                return values
        except ValueError:
            continue
        logger.debug("%s: draw rejected by an avoid constraint", family.id)
    raise ValueError(f"{family.id}: no admissible parameters after {_MAX_DRAWS} draws from {overrides}")


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

class FamilyInstance:
    """A family with concrete values: operators, or coefficient matrices for the coefficient model."""

    def __init__(self, family: Family, values: dict[str, float], coefficients: dict[str, float]):
        self.family = family
        self.values = values
        self.coefficients = coefficients
        self.delta = values["delta"]
        self.F = Polynomial.monomial(self.delta, 2)
        self.A: SeparableOperator | None = None
        self.B: SeparableOperator | None = None
        self.CA: np.ndarray | None = None
        self.CB: np.ndarray | None = None
        self.W: np.ndarray | None = None

    @property
    def is_coefficient_model(self) -> bool:
        return self.A is None


def _theta(coefficients: dict[str, float], names) -> list[float]:
    return [coefficients[n] for n in names]


def build_family(family: Family, values: dict[str, float]) -> FamilyInstance:
    coefficients = resolve_coefficients(family, values)
    inst = FamilyInstance(family, values, coefficients)
    a_names, b_names = family.coefficient_names[:4], family.coefficient_names[4:]
    if family.setting == "case1":
        inst.A = case1_operator(_theta(coefficients, a_names), values["shift"])
        inst.B = case1_operator(_theta(coefficients, b_names), values["shift"])
    elif family.setting == "trig" and family.sigma == "zero-sigma2":
        inst.CA = theta_matrix(_theta(coefficients, a_names))
        inst.CB = theta_matrix(_theta(coefficients, b_names))
        inst.W = sigma_pair_matrix(values["sigma1"], values["sigma2"])
    elif family.setting == "trig":
        L = values["L"]
        support = Interval(lo=-L - 0.5, hi=L + 0.5)
        domain = _trig_domain(family, values)
        inst.A = trig_four_term(_theta(coefficients, a_names), values["omega"], domain, support)
        inst.B = trig_four_term(_theta(coefficients, b_names), values["omega"], domain, support)
    elif family.setting == "laurent":
        support = Interval(lo=values["alpha"], hi=values["beta"])
        inst.A, inst.B = laurent_pair(
            _theta(coefficients, ("ga0", "ga1", "ga2", "ga3")),
            _theta(coefficients, ("gb0", "gb1", "gb2", "gb3")),
            support,
        )
    else:
        support = Interval(lo=values["alpha"], hi=values["beta"])
        inst.A, inst.B = projection_pair(coefficients["mu"], support)
    return inst


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _commute_expected(family: Family, scope: dict[str, float]) -> bool | None:
    if family.commute_iff is None:
        return None
    needed = {s.name for s in parse_expression(family.commute_iff, set(scope)).free_symbols}
    return abs(evaluate_expression(family.commute_iff, {n: scope[n] for n in needed})) <= _COMMUTE_TOL


def _operator_claims(inst: FamilyInstance, tol: float, cfg: PairingConfig) -> tuple[CovarianceReport, dict, dict]:
    A, B = inst.A, inst.B
    report = check_covariance(A, B, inst.F, tol, cfg)
    AB = compose(A, B, cfg)
    BA = compose(B, A, cfg)
    comm = commutator(A, B, cfg)
    checks = {
        "ab_zero": lambda: is_kernel_zero(KernelSum.of((1, AB)), tol, cfg),
        "ba_zero": lambda: is_kernel_zero(KernelSum.of((1, BA)), tol, cfg),
        "ab_eq_ba": lambda: is_kernel_zero(comm, tol, cfg),
        "ab_eq_b_over_delta": lambda: is_kernel_zero(KernelSum.of((1, AB), (-1, scale_operator(B, 1.0 / inst.delta))), tol, cfg),
        "a_idempotent": lambda: is_kernel_zero(KernelSum.of((1, power(A, 2, cfg)), (-1, A)), tol, cfg),
    }
    identities = {claim: checks[claim]() for claim in inst.family.claims if claim != "relation"}
    return report, identities, {"commutator_norm": kernel_norm(comm, cfg), "commutes": float(is_kernel_zero(comm, tol, cfg))}


def _matrix_zero(X: np.ndarray, scale: float, tol: float) -> bool:
    return float(np.linalg.norm(X)) <= tol * (1.0 + scale)


def _coefficient_claims(inst: FamilyInstance, tol: float) -> tuple[CovarianceReport, dict, dict]:
    CA, CB, W = inst.CA, inst.CB, inst.W
    AB, BA = CA @ W @ CB, CB @ W @ CA
    residual = coefficient_model_residual(CA, CB, W, inst.F)
    scale = float(np.linalg.norm(AB) + np.linalg.norm(CB @ W @ CA @ W @ CA) * abs(inst.delta))
    threshold = (tol * (1.0 + scale)) ** 2
    r = float(np.sum(residual ** 2))
    report = CovarianceReport(
        holds=r <= threshold, residual_on_G=r, tolerance_used=tol,
        method="coefficient_model", scale=scale, threshold=threshold,
    )
    pair_scale = float(np.linalg.norm(CA) * np.linalg.norm(CB) * np.max(np.abs(W)))
    checks = {
        "ab_zero": lambda: _matrix_zero(AB, pair_scale, tol),
        "ba_zero": lambda: _matrix_zero(BA, pair_scale, tol),
        "ab_eq_ba": lambda: _matrix_zero(AB - BA, pair_scale, tol),
        "ab_eq_b_over_delta": lambda: _matrix_zero(AB - CB / inst.delta, pair_scale, tol),
        "a_idempotent": lambda: _matrix_zero(CA @ W @ CA - CA, pair_scale, tol),
    }
    identities = {claim: checks[claim]() for claim in inst.family.claims if claim != "relation"}
    commutes = _matrix_zero(AB - BA, pair_scale, tol)
    return report, identities, {"commutator_norm": float(np.linalg.norm(AB - BA)), "commutes": float(commutes)}


def check_family_instance(inst: FamilyInstance, tol: float = 1e-10, cfg: PairingConfig = _DEFAULT_CFG) -> CovarianceReport:
    if inst.is_coefficient_model:
        report, identities, details = _coefficient_claims(inst, tol)
    else:
        report, identities, details = _operator_claims(inst, tol, cfg)
    expected = _commute_expected(inst.family, {**inst.values, **inst.coefficients})
    if expected is not None:
        identities["commute_iff"] = bool(details["commutes"]) == expected
    return report.model_copy(update={
        "identities": {**report.identities, **identities},
        "details": {**report.details, **details},
        "family_id": inst.family.id,
    })


def verify_family(
    family_id: str,
    params: dict[str, float] | None = None,
    tol: float = 1e-10,
    seed: int = 0,
    registry: FamilyRegistry | None = None,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> CovarianceReport:
    """Instantiate a registered family and check the relation and its stated identities.

    Missing parameters are drawn from ``numpy.random.default_rng(seed)``.
    Raises ValueError for an unknown family id.
    """
    registry = registry or load_registry()
    family = registry.get(family_id)
    values = draw_family_params(family, np.random.default_rng(seed), params)
    return check_family_instance(build_family(family, values), tol, cfg)


def list_families(registry: FamilyRegistry | None = None) -> list[tuple[str, str]]:
    registry = registry or load_registry()
    return [(family_id, registry.get(family_id).description) for family_id in registry.ids]
