"""Finding coefficients that satisfy AB = B·F(A).

For fixed A the residual is linear in B, so the admissible B of an affine
template form the nullspace of a matrix V.  For fixed B the residual is
polynomial in A's parameters and is solved by damped Gauss–Newton from a set
of seeds.
"""
import itertools
import logging

import numpy as np
from scipy.linalg import null_space, svdvals
from scipy.optimize import least_squares

from algebra.covariance import check_covariance, relation_regions
from algebra.operator_core import flatten_many, gram_cross, gram_root
from algebra.trig import trig_system_matrix
from models.atoms import PairingConfig
from models.operators import ParamOperator, Polynomial, SeparableOperator
from models.reports import SolveResult

logger = logging.getLogger(__name__)

_DEFAULT_CFG = PairingConfig()

# Seeding lattices grow as 3^k; past this many parameters only user seeds are used.
_MAX_LATTICE_PARAMS = 6


class LinearSystem:
    """V with V·θ = 0 ⟺ the residual kernel vanishes; ``rows`` labels each equation.

    ``scale`` is the largest uncancelled kernel scale over the unit parameter
    vectors, the magnitude V would have without cancellation.
    """

    def __init__(self, matrix: np.ndarray, rows: list[str], params: tuple[str, ...], scale: float = 0.0):
        self.matrix = matrix
        self.rows = rows
        self.params = params
        self.scale = scale


def _full_rank(G: np.ndarray, rank_tol: float) -> bool:
    eigvals = np.linalg.eigvalsh(0.5 * (G + G.T))
    return eigvals.size > 0 and float(eigvals[0]) > rank_tol * float(eigvals[-1])


def _atom_label(atom) -> str:
    if atom.kind in ("sin", "cos"):
        return f"{atom.kind}({atom.omega:g})"
    if atom.kind in ("monomial", "laurent"):
        return f"{atom.kind}({atom.exponent})"
    return atom.kind


def linear_system_for_B(
    A: SeparableOperator,
    F: Polynomial,
    B_template: ParamOperator,
    cfg: PairingConfig = _DEFAULT_CFG,
    rank_tol: float = 1e-9,
) -> LinearSystem:
    """Stack the residual equations of every region, one column per parameter.

    On a region whose atom products are linearly independent the equations are
    the raw coefficients of the residual; otherwise they are the coefficients in
    an orthonormalized product basis.
    """
    if not B_template.params:
        raise ValueError("B template has no parameters")
    if not B_template.is_homogeneous:
        raise ValueError("B template must be homogeneous (no constant part)")
    n = len(B_template.params)
    columns_regions = []
    scale = 0.0
    for p in range(n):
        regions, column_scale = relation_regions(A, B_template.instantiate(np.eye(n)[p]), F, cfg)
        columns_regions.append(regions)
        scale = max(scale, column_scale)

    blocks: list[np.ndarray] = []
    labels: list[str] = []
    for r_index, region in enumerate(columns_regions[0]):
        for x, s in region.blocks():
            kernels = [cols[r_index].kernel for cols in columns_regions]
            left, right, mats = flatten_many(kernels, x, s, keep_zeros=True)
            if not left or not right:
                continue
            Gt = gram_cross(left, left, x, cfg)
            Gs = gram_cross(right, right, s, cfg)
            if _full_rank(Gt, rank_tol) and _full_rank(Gs, rank_tol):
                blocks.append(np.stack([m.ravel() for m in mats], axis=1))
                labels += [
                    f"c{region.condition}:{_atom_label(lu)}|{_atom_label(ru)}" for lu in left for ru in right
                ]
            else:
                Rt, Rs = gram_root(Gt), gram_root(Gs)
                projected = [(Rt @ m @ Rs.T).ravel() for m in mats]
                blocks.append(np.stack(projected, axis=1))
                labels += [f"c{region.condition}:projected[{k}]" for k in range(projected[0].size)]
    if not blocks:
        return LinearSystem(np.zeros((1, n)), ["empty"], B_template.params, scale)
    return LinearSystem(np.vstack(blocks), labels, B_template.params, scale)


def build_linear_system_for_B(
    A: SeparableOperator,
    F: Polynomial,
    B_template: ParamOperator,
    cfg: PairingConfig = _DEFAULT_CFG,
    rank_tol: float = 1e-9,
) -> np.ndarray:
    return linear_system_for_B(A, F, B_template, cfg, rank_tol).matrix


def nullspace(V: np.ndarray, rank_tol: float = 1e-9, scale: float = 0.0) -> SolveResult:
    """Orthonormal nullspace basis.

    Singular values at or below rank_tol·max(σ_max, scale) count as zero.  Pass
    the uncancelled magnitude of the system as ``scale`` when V may cancel to
    rounding noise; σ_max alone is then noise too.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.size == 0:
        raise ValueError("nullspace needs a non-empty matrix")
    if not rank_tol > 0.0:
        raise ValueError(f"rank_tol must be positive, got {rank_tol}")
    singular_values = svdvals(V)
    s_max = float(singular_values[0]) if singular_values.size else 0.0
    cutoff = rank_tol * max(s_max, scale)
    rcond = cutoff / s_max if s_max > 0.0 else rank_tol
    basis = null_space(V, rcond=rcond)
    return SolveResult(
        kind="nullspace",
        vectors=[[float(x) for x in col] for col in basis.T],
        nullspace_dim=basis.shape[1],
        singular_values=[float(x) for x in singular_values],
    )


def detV_trig(theta_a, delta: float, s1: float, s2: float) -> float:
    """Determinant of the four-term system matrix V for AB = δBA²."""
    return float(np.linalg.det(trig_system_matrix(theta_a, delta, s1, s2)))


def _verify(A, B, F, tol, cfg) -> tuple[bool, float]:
    report = check_covariance(A, B, F, tol, cfg)
    total = report.residual_on_G + report.residual_on_GA_minus_G + report.residual_on_GB_minus_G
    return report.holds, total


def solve_for_B_given_A(
    A: SeparableOperator,
    F: Polynomial,
    B_template: ParamOperator,
    rank_tol: float = 1e-9,
    tol: float = 1e-10,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> SolveResult:
    """Nullspace of V; basis vectors the three-region check rejects are dropped."""
    system = linear_system_for_B(A, F, B_template, cfg, rank_tol)
    result = nullspace(system.matrix, rank_tol, system.scale)
    vectors, residuals = [], []
    for vector in result.vectors:
        holds, residual = _verify(A, B_template.instantiate(vector), F, tol, cfg)
        if not holds:
            logger.warning("Nullspace vector %s fails verification (residual %.3e), dropped", vector, residual)
            continue
        vectors.append(vector)
        residuals.append(residual)
    return result.model_copy(update={
        "params": list(B_template.params),
        "vectors": vectors,
        "nullspace_dim": len(vectors),
        "residuals": residuals,
    })


# ---------------------------------------------------------------------------
# Nonlinear: A given B
# ---------------------------------------------------------------------------

def _residual_function(B: SeparableOperator, F: Polynomial, A_template: ParamOperator, cfg: PairingConfig):
    """θ ↦ projected residual vector of AB − B·F(A(θ)) over all regions."""
    sample = A_template.instantiate(np.ones(len(A_template.params)))
    regions, _ = relation_regions(sample, B, F, cfg)
    roots = []
    for region in regions:
        for x, s in region.blocks():
            left, right, _ = flatten_many([region.kernel], x, s, keep_zeros=True)
            if left and right:
                roots.append((gram_root(gram_cross(left, left, x, cfg)), gram_root(gram_cross(right, right, s, cfg))))
            else:
                roots.append(None)

    def residual(theta: np.ndarray) -> np.ndarray:
        current, _ = relation_regions(A_template.instantiate(theta), B, F, cfg)
        parts = []
        k = 0
        for region in current:
            for x, s in region.blocks():
                factors = roots[k]
                k += 1
                if factors is None:
                    continue
                _, _, (C,) = flatten_many([region.kernel], x, s, keep_zeros=True)
                Rt, Rs = factors
                parts.append((Rt @ C @ Rs.T).ravel())
        return np.concatenate(parts) if parts else np.zeros(1)

    return residual


def _lattice(n_params: int, F: Polynomial) -> list[np.ndarray]:
    if n_params > _MAX_LATTICE_PARAMS:
        logger.info("  %d parameters: lattice seeding skipped", n_params)
        return []
    leading = max((abs(d) for d in F.coeffs[1:]), default=0.0)
    spread = 1.0 / leading if leading > 0.0 else 1.0
    return [spread * np.array(p) for p in itertools.product((-1.0, 0.0, 1.0), repeat=n_params)]


def solve_for_A_given_B(
    B: SeparableOperator,
    F: Polynomial,
    A_template: ParamOperator,
    seeds: list[list[float]] | None = None,
    tol: float = 1e-10,
    cfg: PairingConfig = _DEFAULT_CFG,
    lattice: bool = True,
    max_iter: int = 100,
    dedup_distance: float = 1e-6,
) -> SolveResult:
    """Gauss–Newton with finite-difference Jacobians from every seed.

    Converged points are deduplicated in seed order and kept only when the
    three-region check accepts them.  No converged seed gives an empty result.
    """
    n = len(A_template.params)
    if n == 0:
        raise ValueError("A template has no parameters")
    starts = [np.asarray(s, dtype=float) for s in (seeds or [])]
    for s in starts:
        if s.shape != (n,):
            raise ValueError(f"seed {s.tolist()} does not have {n} entries")
    if lattice:
        starts += _lattice(n, F)
    residual = _residual_function(B, F, A_template, cfg)

    found: list[np.ndarray] = []
    norms: list[float] = []
    for start in starts:
        fit = least_squares(
            residual, start, jac="2-point", method="trf",
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_iter * (n + 1),
        )
        theta = fit.x
        if any(np.linalg.norm(theta - other) <= dedup_distance for other in found):
            continue
        holds, total = _verify(A_template.instantiate(theta), B, F, tol, cfg)
        if not holds:
            logger.debug("Seed %s did not converge (residual %.3e)", start.tolist(), total)
            continue
        found.append(theta)
        norms.append(total)
    logger.info("  %d distinct solutions from %d seeds", len(found), len(starts))
    return SolveResult(
        kind="roots",
        params=list(A_template.params),
        vectors=[[float(x) for x in v] for v in found],
        residuals=norms,
    )
