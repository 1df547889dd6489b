"""The four-term trigonometric operator family and its closed forms.

    A = θ1 sin(ωt)cos(ωs) + θ2 cos(ωt)cos(ωs) + θ3 sin(ωt)sin(ωs) + θ4 cos(ωt)sin(ωs)

is stored with left basis [Sin ω, Cos ω], right basis [Sin ω, Cos ω] and
coefficient matrix [[θ3, θ1], [θ4, θ2]].  When sin and cos are orthogonal on
the integration interval the pairing matrix is diag(σ1, σ2), and products,
commutators and the linear system for B have the closed forms below.

Residual components are indexed by (left, right) basis pair: SS, SC, CS, CC.
"""
import logging

import numpy as np

from algebra.atoms import pair, sigma1, sigma2
from models.atoms import FunctionAtom, Interval, PairingConfig
from models.operators import ParamOperator, Polynomial, SeparableOperator

logger = logging.getLogger(__name__)

# Order of the rows of the system matrix V.
SYSTEM_ROWS = ("SC", "CC", "SS", "CS")


def theta_matrix(theta) -> np.ndarray:
    t1, t2, t3, t4 = (float(x) for x in theta)
    return np.array([[t3, t1], [t4, t2]])


def theta_from_matrix(C: np.ndarray) -> tuple[float, float, float, float]:
    return float(C[0, 1]), float(C[1, 1]), float(C[0, 0]), float(C[1, 0])


def trig_four_term(theta, omega: float, domain: Interval, left_support: Interval) -> SeparableOperator:
    basis = (FunctionAtom.sin(omega), FunctionAtom.cos(omega))
    return SeparableOperator.from_matrix(basis, theta_matrix(theta), basis, domain, left_support)


def trig_template(
    omega: float,
    domain: Interval,
    left_support: Interval,
    names: tuple[str, str, str, str] = ("b1", "b2", "b3", "b4"),
) -> ParamOperator:
    """Four-term operator with each θ_i a free parameter."""
    basis = (FunctionAtom.sin(omega), FunctionAtom.cos(omega))
    n1, n2, n3, n4 = names
    return ParamOperator(
        params=names, left=basis, coeff=((n3, n1), (n4, n2)), right=basis,
        domain=domain, left_support=left_support,
    )


def trig_sigmas(omega: float, domain: Interval) -> tuple[float, float]:
    return sigma1(omega, domain.lo, domain.hi), sigma2(omega, domain.lo, domain.hi)


def as_trig_four_term(
    A: SeparableOperator,
    cfg: PairingConfig = PairingConfig(),
    tol: float = 1e-12,
) -> tuple[tuple[float, float, float, float], float] | None:
    """(θ, ω) when A is a four-term operator with sin ⟂ cos on its domain, else None."""
    if len(A.left) != 2 or len(A.right) != 2:
        return None
    omegas = set()
    for basis in (A.left, A.right):
        s, c = basis
        if not (isinstance(s, FunctionAtom) and isinstance(c, FunctionAtom)):
            return None
        if s.kind != "sin" or c.kind != "cos" or s.omega != c.omega:
            return None
        if s.scale != 1.0 or c.scale != 1.0 or s.restriction is not None or c.restriction is not None:
            return None
        omegas.add(s.omega)
    if len(omegas) != 1:
        return None
    omega = omegas.pop()
    if abs(pair(A.right[0], A.right[1], A.domain, cfg)) > tol * (1.0 + A.domain.length):
        return None
    return theta_from_matrix(A.matrix), omega


# ---------------------------------------------------------------------------
# Commutator
# ---------------------------------------------------------------------------

def trig_commutator_components(theta_a, theta_b, s1: float, s2: float) -> dict[str, float]:
    """Coefficients of AB − BA on the four basis products."""
    a1, a2, a3, a4 = theta_a
    b1, b2, b3, b4 = theta_b
    return {
        "SS": s2 * (a1 * b4 - b1 * a4),
        "SC": s1 * (a3 * b1 - b3 * a1) + s2 * (a1 * b2 - b1 * a2),
        "CS": s1 * (a4 * b3 - b4 * a3) + s2 * (a2 * b4 - b2 * a4),
        "CC": s1 * (a4 * b1 - b4 * a1),
    }


def trig_commutes(theta_a, theta_b, s1: float, s2: float, tol: float = 1e-10) -> bool:
    """Closed-form commutation test: every commutator component vanishes."""
    components = trig_commutator_components(theta_a, theta_b, s1, s2)
    scale = 1.0 + max(abs(s1), abs(s2)) * float(np.max(np.abs(theta_a))) * float(np.max(np.abs(theta_b)))
    return all(abs(v) <= tol * scale for v in components.values())


# ---------------------------------------------------------------------------
# Linear system for B under AB = δBA²
# ---------------------------------------------------------------------------

def trig_square_components(theta_a, s1: float, s2: float) -> dict[str, float]:
    """Coefficients of A² on the four basis products."""
    a1, a2, a3, a4 = theta_a
    return {
        "SS": a3 * a3 * s1 + a1 * a4 * s2,
        "SC": a1 * (a3 * s1 + a2 * s2),
        "CS": a4 * (a3 * s1 + a2 * s2),
        "CC": a1 * a4 * s1 + a2 * a2 * s2,
    }


def trig_system_matrix(theta_a, delta: float, s1: float, s2: float) -> np.ndarray:
    """V with V·θ_B = 0 ⟺ AB = δBA²; rows SC, CC, SS, CS, columns θ_B1..θ_B4."""
    a1, a2, a3, a4 = (float(x) for x in theta_a)
    p = trig_square_components(theta_a, s1, s2)
    return np.array([
        [a3 * s1 - delta * s2 * p["CC"], a1 * s2, -delta * s1 * p["SC"], 0.0],
        [a4 * s1, a2 * s2 - delta * s2 * p["CC"], 0.0, -delta * s1 * p["SC"]],
        [-delta * s2 * p["CS"], 0.0, a3 * s1 - delta * s1 * p["SS"], a1 * s2],
        [0.0, -delta * s2 * p["CS"], a4 * s1, a2 * s2 - delta * s1 * p["SS"]],
    ])


def detv_trig_factored(theta_a, delta: float, s1: float, s2: float) -> float:
    """det V in factored form; valid only for θ_A4 = 0, where V is upper triangular."""
    a1, a2, a3, a4 = theta_a
    if a4 != 0.0:
        raise ValueError("the factored determinant needs theta_a4 = 0")
    return (
        a2 * a3 * s1 * s2
        * (delta * a3 * a3 * s1 * s1 - a2 * s2)
        * (delta * a2 * a2 * s2 * s2 - a3 * s1)
        * (delta * a2 * s2 - 1.0)
        * (delta * a3 * s1 - 1.0)
    )


# ---------------------------------------------------------------------------
# Coefficient model
# ---------------------------------------------------------------------------

def coefficient_model_residual(CA: np.ndarray, CB: np.ndarray, W: np.ndarray, F: Polynomial) -> np.ndarray:
    """Coefficient matrix of AB − B·F(A) when every pairing is given by W.

    Used where a pairing matrix (e.g. σ2 = 0 with σ1 ≠ 0) has no realization
    by atoms of one frequency; the basis products are taken as independent.
    """
    WA = W @ CA
    r = CA.shape[1]
    if F.degree == 0:
        sep = np.zeros_like(CA)
    else:
        acc = F.coeffs[-1] * np.eye(r)
        for delta in reversed(F.coeffs[1:-1]):
            acc = acc @ WA + delta * np.eye(r)
        sep = CA @ acc
    return CA @ W @ CB - F.constant * CB - CB @ W @ sep


def sigma_pair_matrix(s1: float, s2: float) -> np.ndarray:
    return np.diag([s1, s2])
