"""Deciding the covariance relation AB = B·F(A).

With G = G_A ∩ G_B and X the union of the left supports, the relation holds
exactly when three kernels vanish:

    1. AB − δ0·B − B·sep(F(A))   on X × G
    2. B·sep(F(A))               on X × (G_A \\ G)
    3. AB − δ0·B                 on X × (G_B \\ G)

Each residual is the squared L₂ norm of the kernel on its region; a region
passes when its norm is at most ``tol·(1 + scale)``, with ``scale`` the sum of
the kernel scales of AB, δ0·B and B·sep(F(A)).
"""
import logging
import math

import numpy as np

from algebra.atoms import pair
from algebra.errors import NumericalError
from algebra.operator_core import (
    commutator,
    compose,
    compose_affine,
    inner_gram,
    kernel_grid_max,
    kernel_l2_norm_sq,
    kernel_scale,
    poly_eval,
    power,
    scale_operator,
)
from algebra.trig import as_trig_four_term, trig_commutator_components, trig_commutes, trig_sigmas
from models.atoms import Interval, PairingConfig, interval_union
from models.operators import KernelSum, Polynomial, SeparableOperator
from models.reports import CovarianceReport

logger = logging.getLogger(__name__)

_DEFAULT_CFG = PairingConfig()

# Pointwise bound, relative to 1 + scale, for a kernel whose L₂ norm passed.
GRID_TOL = 1e-8

IDENTITY = Polynomial(coeffs=(0.0, 1.0))


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def _outside(domain: Interval, G: Interval | None) -> list[Interval]:
    if G is None:
        return [] if domain.is_degenerate else [domain]
    return domain.difference(G)


def _norm_sq(K: KernelSum, xs: list[Interval], ss: list[Interval], cfg: PairingConfig) -> float:
    return sum(kernel_l2_norm_sq(K, x, s, cfg) for x in xs for s in ss if not s.is_degenerate)


def _grid_max(K: KernelSum, xs: list[Interval], ss: list[Interval], n: int) -> float:
    return max((kernel_grid_max(K, x, s, n) for x in xs for s in ss), default=0.0)


def _threshold(tol: float, scale: float) -> float:
    return (tol * (1.0 + scale)) ** 2


def is_kernel_zero(K: KernelSum, tol: float = 1e-10, cfg: PairingConfig = _DEFAULT_CFG) -> bool:
    """True when ‖K‖ ≤ tol·(1 + scale) over the union of its supports and domains."""
    if not K.terms:
        return True
    xs = interval_union(K.supports)
    ss = interval_union(K.domains)
    return _norm_sq(K, xs, ss, cfg) <= _threshold(tol, kernel_scale(K))


def kernel_norm(K: KernelSum, cfg: PairingConfig = _DEFAULT_CFG) -> float:
    if not K.terms:
        return 0.0
    return math.sqrt(_norm_sq(K, interval_union(K.supports), interval_union(K.domains), cfg))


# ---------------------------------------------------------------------------
# General check
# ---------------------------------------------------------------------------

def _relation_terms(A: SeparableOperator, B: SeparableOperator, F: Polynomial, cfg: PairingConfig):
    AB = compose(A, B, cfg)
    FA = poly_eval(F, A, cfg)
    delta0_B, B_sep = (t.op for t in compose_affine(B, FA, cfg).terms)
    return AB, delta0_B, B_sep


class Region:
    """One of the three condition regions: a side-specific kernel on xs × ss."""

    def __init__(self, condition: int, kernel: KernelSum, xs: list[Interval], ss: list[Interval]):
        self.condition = condition
        self.kernel = kernel
        self.xs = xs
        self.ss = [s for s in ss if not s.is_degenerate]

    def blocks(self) -> list[tuple[Interval, Interval]]:
        return [(x, s) for x in self.xs for s in self.ss]


def relation_regions(
    A: SeparableOperator,
    B: SeparableOperator,
    F: Polynomial,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> tuple[list[Region], float]:
    """The three condition regions of AB = B·F(A) and the combined kernel scale."""
    AB, delta0_B, B_sep = _relation_terms(A, B, F, cfg)
    full = KernelSum.of((1, AB), (-1, delta0_B), (-1, B_sep))
    G = A.domain.intersect(B.domain)
    xs = interval_union([A.left_support, B.left_support])
    regions = [
        Region(1, full, xs, [G] if G is not None else []),
        Region(2, KernelSum.of((-1, B_sep)), xs, _outside(A.domain, G)),
        Region(3, KernelSum.of((1, AB), (-1, delta0_B)), xs, _outside(B.domain, G)),
    ]
    return regions, kernel_scale(full)


def check_covariance(
    A: SeparableOperator,
    B: SeparableOperator,
    F: Polynomial,
    tol: float = 1e-10,
    cfg: PairingConfig = _DEFAULT_CFG,
    grid_points: int = 20,
) -> CovarianceReport:
    """Three-region verdict on AB = B·F(A)."""
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    regions, scale = relation_regions(A, B, F, cfg)
    residuals = [_norm_sq(r.kernel, r.xs, r.ss, cfg) for r in regions]
    threshold = _threshold(tol, scale)
    holds = all(r <= threshold for r in residuals)
    grid_max = max(_grid_max(r.kernel, r.xs, r.ss, grid_points) for r in regions)
    if holds and grid_max > GRID_TOL * (1.0 + scale):
        raise NumericalError(
            f"residual norm passed but the kernel reaches {grid_max:.3e} on the grid "
            f"(bound {GRID_TOL * (1.0 + scale):.3e})"
        )
    logger.debug("Covariance residuals %s, threshold %.3e", residuals, threshold)
    return CovarianceReport(
        holds=holds,
        residual_on_G=residuals[0],
        residual_on_GA_minus_G=residuals[1],
        residual_on_GB_minus_G=residuals[2],
        tolerance_used=tol,
        method="general",
        scale=scale,
        threshold=threshold,
        grid_max=grid_max,
    )


# ---------------------------------------------------------------------------
# One-term kernels
# ---------------------------------------------------------------------------

def _is_rank_one(op: SeparableOperator) -> bool:
    return len(op.left) == 1 and len(op.right) == 1


def check_rank_one(
    A: SeparableOperator,
    B: SeparableOperator,
    F: Polynomial,
    tol: float = 1e-10,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> CovarianceReport:
    """Fast path for A = α a⊗c and B = β b⊗e.

    With k2 = Q_{G_A}(βb, c) and k1 = Q_{G_B}(αa, e)·Σ_j δ_j Q_{G_A}(αa, c)^(j-1)
    the relation reads

        [k2·αa(t) − δ0·βb(t)] e(s) = k1·βb(t) c(s)     on X × G

    together with k1·βb(t)c(s) = 0 on X × (G_A \\ G) and
    [k2·αa − δ0·βb] e = 0 on X × (G_B \\ G).
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if not (_is_rank_one(A) and _is_rank_one(B)):
        raise ValueError("check_rank_one needs one-term kernels for both A and B")
    alpha, beta = A.coeff[0][0], B.coeff[0][0]
    k2 = beta * float(inner_gram(A, B, cfg)[0, 0])
    q = alpha * float(inner_gram(A, A, cfg)[0, 0])
    qe = alpha * float(inner_gram(B, A, cfg)[0, 0])
    k1 = qe * sum(d * q ** (j - 1) for j, d in enumerate(F.coeffs) if j >= 1)
    delta0 = F.constant

    a, c, b, e = A.left[0], A.right[0], B.left[0], B.right[0]
    t_ae = SeparableOperator(left=(a,), coeff=((alpha * k2,),), right=(e,), domain=B.domain, left_support=A.left_support)
    t_be = SeparableOperator(left=(b,), coeff=((-delta0 * beta,),), right=(e,), domain=B.domain, left_support=B.left_support)
    t_bc = SeparableOperator(left=(b,), coeff=((-beta * k1,),), right=(c,), domain=A.domain, left_support=B.left_support)
    full = KernelSum.of((1, t_ae), (1, t_be), (1, t_bc))

    G = A.domain.intersect(B.domain)
    xs = interval_union([A.left_support, B.left_support])
    on_G = [G] if G is not None else []
    residuals = (
        _norm_sq(full, xs, on_G, cfg),
        _norm_sq(KernelSum.of((1, t_bc)), xs, _outside(A.domain, G), cfg),
        _norm_sq(KernelSum.of((1, t_ae), (1, t_be)), xs, _outside(B.domain, G), cfg),
    )
    scale = kernel_scale(KernelSum.of(*((1, op) for op in _relation_terms(A, B, F, cfg))))
    threshold = _threshold(tol, scale)

    details = {"k1": k1, "k2": k2, "q": q}
    if G is not None and not G.is_degenerate and k2 != 0.0:
        ee = pair(e, e, G, cfg)
        if ee > 0.0:
            # k1·c = λ·e on G, least-squares λ
            details["lambda"] = k1 * pair(c, e, G, cfg) / ee
    return CovarianceReport(
        holds=all(r <= threshold for r in residuals),
        residual_on_G=residuals[0],
        residual_on_GA_minus_G=residuals[1],
        residual_on_GB_minus_G=residuals[2],
        tolerance_used=tol,
        method="rank_one",
        scale=scale,
        threshold=threshold,
        details=details,
    )


# ---------------------------------------------------------------------------
# Corollaries
# ---------------------------------------------------------------------------

def _used(C: np.ndarray, axis: int) -> np.ndarray:
    return np.flatnonzero(np.any(C != 0.0, axis=axis))


def _cross_vanishes(X, Y, W: np.ndarray, rows: np.ndarray, cols: np.ndarray, G: Interval, tol: float, cfg) -> bool:
    for j in rows:
        for k in cols:
            size = math.sqrt(abs(pair(X[j], X[j], G, cfg)) * abs(pair(Y[k], Y[k], G, cfg)))
            if abs(W[j, k]) > tol * (1.0 + size):
                return False
    return True


def check_orthogonality_sufficient(
    A: SeparableOperator,
    B: SeparableOperator,
    d: int,
    tol: float = 1e-10,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> bool:
    """True when Q_G(b_k, c_m) = 0 and Q_G(e_k, a_m) = 0 for every term in use.

    In that case AB = 0 and B·A^d = 0, so AB = δ·B·A^d for every δ.
    """
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    if A.domain != B.domain:
        raise ValueError("orthogonality check needs A and B on the same domain")
    G = A.domain
    CA, CB = A.matrix, B.matrix
    W = inner_gram(A, B, cfg)
    W_rev = inner_gram(B, A, cfg)
    ok = (
        _cross_vanishes(A.right, B.left, W, _used(CA, 0), _used(CB, 1), G, tol, cfg)
        and _cross_vanishes(B.right, A.left, W_rev, _used(CB, 0), _used(CA, 1), G, tol, cfg)
    )
    if not ok:
        return False
    AB = KernelSum.of((1, compose(A, B, cfg)))
    BAd = KernelSum.of((1, compose(B, power(A, d, cfg), cfg)))
    if not (is_kernel_zero(AB, tol, cfg) and is_kernel_zero(BAd, tol, cfg)):
        raise NumericalError("cross pairings vanish but AB or B·A^d does not")
    return True


def check_commutativity(
    A: SeparableOperator,
    B: SeparableOperator,
    tol: float = 1e-10,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> CovarianceReport:
    """AB = BA, cross-checked by the closed form for four-term trig operators."""
    report = check_covariance(A, B, IDENTITY, tol, cfg).model_copy(update={"method": "commutativity"})
    trig_a = as_trig_four_term(A, cfg)
    trig_b = as_trig_four_term(B, cfg)
    if trig_a is None or trig_b is None:
        return report
    (theta_a, omega_a), (theta_b, omega_b) = trig_a, trig_b
    same_geometry = omega_a == omega_b and A.domain == B.domain and A.left_support == B.left_support
    if not same_geometry or omega_a == 0.0 or A.domain.is_degenerate or A.left_support.is_degenerate:
        return report
    s1, s2 = trig_sigmas(omega_a, A.domain)
    closed = trig_commutes(theta_a, theta_b, s1, s2, tol)
    if closed != report.holds:
        raise NumericalError(
            f"closed-form commutation test ({closed}) disagrees with the kernel check ({report.holds})"
        )
    details = {f"commutator_{k}": v for k, v in trig_commutator_components(theta_a, theta_b, s1, s2).items()}
    return report.model_copy(update={"details": {**report.details, **details}})


def monomial_direct_residual(
    A: SeparableOperator,
    B: SeparableOperator,
    delta: float,
    d: int,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> KernelSum:
    """AB − δ·B·A^d built from ``power`` instead of the functional calculus."""
    return KernelSum.of((1, compose(A, B, cfg)), (-1, scale_operator(compose(B, power(A, d, cfg), cfg), delta)))


def commutator_norm(A: SeparableOperator, B: SeparableOperator, cfg: PairingConfig = _DEFAULT_CFG) -> float:
    return kernel_norm(commutator(A, B, cfg), cfg)
