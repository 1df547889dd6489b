"""Named reproductions of the worked examples and closed forms.

Each reproduction returns a ReproductionReport whose checks carry the measured
value and the bound it was held to.  Any registered family id is also a
reproduction: that family over ``settings.family_draws`` seeded draws.
"""
import logging
import math
from collections.abc import Callable

import numpy as np

from algebra.atoms import sigma1, sigma2
from algebra.covariance import check_covariance, kernel_norm
from algebra.operator_core import commutator, compose, inner_gram, power
from algebra.quadrature import quadrature
from algebra.solver import linear_system_for_B, solve_for_B_given_A
from algebra.trig import detv_trig_factored, trig_four_term, trig_sigmas, trig_system_matrix, trig_template
from models.atoms import Interval
from models.operators import KernelSum, Polynomial
from models.reports import ReproductionReport
from pipeline.families import laurent_pair, load_registry, projection_pair, verify_family
from settings import Settings

logger = logging.getLogger(__name__)

_EXACT = 1e-10
_PAIRING_EXACT = 1e-12
_FACTOR_MARGIN = 0.1
_SAMPLES = 100
_NULLSPACE_SYSTEMS = 50
_LAURENT_DRAWS = 20


def _signed(rng: np.random.Generator) -> float:
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

def _example3_projection(settings: Settings) -> ReproductionReport:
    cfg = settings.pairing_config
    report = ReproductionReport(id="example3-projection", description="A² = A and AB = BA² = -A for the biorthogonal pair")
    A, B = projection_pair()
    W = inner_gram(A, A, cfg)
    report.add("pairings_identity", bool(np.max(np.abs(W - np.eye(2))) <= _PAIRING_EXACT),
               float(np.max(np.abs(W - np.eye(2)))), _PAIRING_EXACT)

    A2 = power(A, 2, cfg)
    for name, K in (
        ("a_squared_equals_a", KernelSum.of((1, A2), (-1, A))),
        ("ab_equals_minus_a", KernelSum.of((1, compose(A, B, cfg)), (1, A))),
        ("ba_squared_equals_minus_a", KernelSum.of((1, compose(B, A2, cfg)), (1, A))),
    ):
        value = kernel_norm(K, cfg)
        report.add(name, value < _EXACT, value, _EXACT)

    verdict = check_covariance(A, B, Polynomial.monomial(1.0, 2), settings.tol, cfg, settings.grid_points)
    worst = math.sqrt(max(verdict.residual_on_G, verdict.residual_on_GA_minus_G, verdict.residual_on_GB_minus_G))
    report.add("relation_holds", verdict.holds and worst < _EXACT, worst, _EXACT)

    perturbed = A.with_matrix(A.matrix + np.array([[0.1, 0.0], [0.0, 0.0]]))
    broken = check_covariance(perturbed, B, Polynomial.monomial(1.0, 2), settings.tol, cfg, settings.grid_points)
    report.add("perturbed_relation_fails", not broken.holds and 1 in broken.violated_conditions,
               broken.residual_on_G, broken.threshold)
    return report


def _laurent_example(settings: Settings) -> ReproductionReport:
    cfg = settings.pairing_config
    report = ReproductionReport(id="laurent-example", description="AB = δBA² = 0 on span{1, 1/t} ⊗ span{1, 1/s}")
    rng = np.random.default_rng(settings.seed)
    ln2 = math.log(2.0)

    A, _ = laurent_pair((0.0, 0.0, 1.0, -2.0 * ln2), (0.0, 0.0, 1.0, 0.0))
    W = inner_gram(A, A, cfg)
    expected = np.array([[1.0, ln2], [ln2, 0.5]])
    report.add("pairing_matrix", bool(np.max(np.abs(W - expected)) <= _PAIRING_EXACT),
               float(np.max(np.abs(W - expected))), _PAIRING_EXACT)

    for k in range(_LAURENT_DRAWS):
        ga2 = 0.0 if k % 4 == 1 else _signed(rng)
        gb2 = 0.0 if k % 4 == 2 else _signed(rng)
        delta = _signed(rng)
        A, B = laurent_pair((0.0, 0.0, ga2, -2.0 * ln2 * ga2), (0.0, 0.0, gb2, 0.0))
        ab = kernel_norm(KernelSum.of((1, compose(A, B, cfg))), cfg)
        report.add(f"draw{k}:ab_zero", ab < _EXACT, ab, _EXACT)
        ba2 = abs(delta) * kernel_norm(KernelSum.of((1, compose(B, power(A, 2, cfg), cfg))), cfg)
        report.add(f"draw{k}:delta_ba_squared_zero", ba2 < _EXACT, ba2, _EXACT)
        comm = kernel_norm(commutator(A, B, cfg), cfg)
        report.add(f"draw{k}:commutes_iff_product_zero", (comm > _EXACT) == (ga2 * gb2 != 0.0), comm, _EXACT)
    return report


# ---------------------------------------------------------------------------
# Four-term trigonometric family
# ---------------------------------------------------------------------------

def _factors(theta, delta: float, s1: float, s2: float) -> list[float]:
    _, a2, a3, _ = theta
    return [
        a2, a3, s1, s2,
        delta * a3 * a3 * s1 * s1 - a2 * s2,
        delta * a2 * a2 * s2 * s2 - a3 * s1,
        delta * a2 * s2 - 1.0,
        delta * a3 * s1 - 1.0,
    ]


def _draw_trig_geometry(rng: np.random.Generator) -> tuple[float, Interval, Interval, float, float]:
    while True:
        L = float(rng.uniform(0.5, 2.0))
        omega = float(rng.uniform(0.5, 3.0))
        domain = Interval(lo=-L, hi=L)
        s1, s2 = trig_sigmas(omega, domain)
        if min(s1, s2) >= _FACTOR_MARGIN:
            return omega, domain, Interval(lo=-L - 0.5, hi=L + 0.5), s1, s2


def _draw_generic(rng: np.random.Generator):
    """θ_A with θ_A4 = 0 and every factor of det V bounded away from 0."""
    while True:
        omega, domain, support, s1, s2 = _draw_trig_geometry(rng)
        delta = _signed(rng)
        theta = (_signed(rng), _signed(rng), _signed(rng), 0.0)
        if min(abs(f) for f in _factors(theta, delta, s1, s2)) >= _FACTOR_MARGIN:
            return theta, delta, omega, domain, support, s1, s2


def _singular_branch(theta, delta: float, s1: float, s2: float, branch: int):
    a1, a2, a3, a4 = theta
    if branch == 0:
        a3 = 1.0 / (delta * s1)
    elif branch == 1:
        a2 = 1.0 / (delta * s2)
    elif branch == 2:
        a2 = delta * a3 * a3 * s1 * s1 / s2
    else:
        a3 = delta * a2 * a2 * s2 * s2 / s1
    return a1, a2, a3, a4


def _assembled_matrix(theta, delta, omega, domain, support, settings: Settings) -> np.ndarray | None:
    """V from the general linear-system builder, rows reordered SC, CC, SS, CS."""
    A = trig_four_term(theta, omega, domain, support)
    system = linear_system_for_B(A, Polynomial.monomial(delta, 2), trig_template(omega, domain, support),
                                 settings.pairing_config, settings.rank_tol)
    name = {"S": f"sin({omega:g})", "C": f"cos({omega:g})"}
    labels = [f"c1:{name[row[0]]}|{name[row[1]]}" for row in ("SC", "CC", "SS", "CS")]
    if not set(labels) <= set(system.rows):
        return None
    return system.matrix[[system.rows.index(label) for label in labels]]


def _detv_factorization(settings: Settings) -> ReproductionReport:
    report = ReproductionReport(id="case2a-detv-factorization", description="det V for θ_A4 = 0 against its factored form")
    rng = np.random.default_rng(settings.seed)
    worst_det = worst_matrix = 0.0
    assembled_ok = True
    for _ in range(_SAMPLES):
        theta, delta, omega, domain, support, s1, s2 = _draw_generic(rng)
        factored = detv_trig_factored(theta, delta, s1, s2)
        V = _assembled_matrix(theta, delta, omega, domain, support, settings)
        if V is None:
            assembled_ok = False
            continue
        closed = trig_system_matrix(theta, delta, s1, s2)
        worst_matrix = max(worst_matrix, float(np.max(np.abs(V - closed)) / (1.0 + np.max(np.abs(closed)))))
        worst_det = max(worst_det, abs(float(np.linalg.det(V)) - factored) / abs(factored))
    report.add("assembled_in_coefficient_rows", assembled_ok)
    report.add("assembled_matches_closed_form", worst_matrix <= 1e-10, worst_matrix, 1e-10)
    report.add("det_matches_factored", worst_det <= 1e-9, worst_det, 1e-9)

    theta, delta, _, _, _, s1, s2 = _draw_generic(rng)
    branch = _singular_branch(theta, delta, s1, s2, 2)
    det_branch = abs(float(np.linalg.det(trig_system_matrix(branch, delta, s1, s2))))
    scale = float(np.max(np.abs(trig_system_matrix(branch, delta, s1, s2)))) ** 4
    report.add("square_branch_singular", det_branch <= 1e-12 * scale, det_branch, 1e-12 * scale)
    return report


def _case2a_nullspace(settings: Settings) -> ReproductionReport:
    cfg = settings.pairing_config
    report = ReproductionReport(id="case2a-nullspace", description="nullspace of V: existence iff det V = 0, every vector verified")
    rng = np.random.default_rng(settings.seed)
    mismatched = unverified = vectors = 0
    for k in range(_NULLSPACE_SYSTEMS):
        theta, delta, omega, domain, support, s1, s2 = _draw_generic(rng)
        singular = k % 2 == 0
        if singular:
            theta = _singular_branch(theta, delta, s1, s2, (k // 2) % 4)
        A = trig_four_term(theta, omega, domain, support)
        template = trig_template(omega, domain, support)
        F = Polynomial.monomial(delta, 2)
        result = solve_for_B_given_A(A, F, template, settings.rank_tol, settings.tol, cfg)
        if (result.nullspace_dim >= 1) != singular:
            mismatched += 1
            logger.warning("  system %d: nullspace dimension %d, det V %s", k, result.nullspace_dim,
                           "zero" if singular else "nonzero")
        for vector in result.vectors:
            vectors += 1
            if not check_covariance(A, template.instantiate(vector), F, settings.tol, cfg, settings.grid_points).holds:
                unverified += 1
    report.add("dimension_matches_determinant", mismatched == 0, float(mismatched), 0.0)
    report.add("vectors_verified", unverified == 0 and vectors > 0, float(unverified), 0.0)
    return report


def _sigma_closed_forms(settings: Settings) -> ReproductionReport:
    cfg = settings.pairing_config
    report = ReproductionReport(id="sigma-closed-forms", description="σ1, σ2 against adaptive quadrature")
    rng = np.random.default_rng(settings.seed)
    worst = worst_sum = 0.0
    for _ in range(_SAMPLES):
        omega = float(rng.uniform(0.1, 5.0))
        lo = float(rng.uniform(-2.0, 2.0))
        hi = lo + float(rng.uniform(0.0, 3.0))
        G = Interval(lo=lo, hi=hi)
        s1, s2 = sigma1(omega, lo, hi), sigma2(omega, lo, hi)
        q1 = quadrature(lambda s: np.sin(omega * s) ** 2, G, cfg)
        q2 = quadrature(lambda s: np.cos(omega * s) ** 2, G, cfg)
        worst = max(worst, abs(s1 - q1), abs(s2 - q2))
        worst_sum = max(worst_sum, abs(s1 + s2 - (hi - lo)))
    report.add("closed_form_matches_quadrature", worst <= _EXACT, worst, _EXACT)
    report.add("sigmas_sum_to_width", worst_sum <= 4 * np.finfo(float).eps * 5.0, worst_sum, 4 * np.finfo(float).eps * 5.0)
    return report


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def _family_checks(settings: Settings, report: ReproductionReport, family_id: str) -> None:
    registry = load_registry(settings.families_path)
    for k in range(settings.family_draws):
        verdict = verify_family(family_id, tol=settings.tol, seed=settings.seed + k,
                                registry=registry, cfg=settings.pairing_config)
        worst = max(verdict.residual_on_G, verdict.residual_on_GA_minus_G, verdict.residual_on_GB_minus_G)
        if not verdict.passed:
            logger.warning("  %s draw %d: relation %s, identities %s", family_id, k, verdict.holds, verdict.identities)
        report.add(f"{family_id}[{k}]", verdict.passed, worst, verdict.threshold)


def _all_families(settings: Settings) -> ReproductionReport:
    report = ReproductionReport(id="families", description="every registered family over seeded draws")
    for family_id in load_registry(settings.families_path).ids:
        _family_checks(settings, report, family_id)
    return report


_REPRODUCTIONS: dict[str, Callable[[Settings], ReproductionReport]] = {
    "example3-projection": _example3_projection,
    "laurent-example": _laurent_example,
    "case2a-detv-factorization": _detv_factorization,
    "case2a-nullspace": _case2a_nullspace,
    "sigma-closed-forms": _sigma_closed_forms,
    "families": _all_families,
}


def available(settings: Settings) -> list[str]:
    return list(_REPRODUCTIONS) + load_registry(settings.families_path).ids


def run(settings: Settings, reproduction_id: str) -> ReproductionReport:
    """Run one reproduction; raises ValueError for an unknown id."""
    logger.info("=== Reproduce: %s ===", reproduction_id)
    if reproduction_id in _REPRODUCTIONS:
        report = _REPRODUCTIONS[reproduction_id](settings)
    else:
        family = load_registry(settings.families_path).get(reproduction_id)
        report = ReproductionReport(id=family.id, description=family.description)
        _family_checks(settings, report, family.id)
    logger.info("  %d checks, %s", len(report.checks), "passed" if report.passed else "FAILED")
    return report
