"""Algebra of separable-kernel operators.

Every operation reduces to matrix algebra on coefficient matrices once the
pairings between right and left functions are known:

    compose(A, B).coeff = C_A · W · C_B,   W[j][k] = Q_{G_A}(c_j, b_k)

Kernel sums are compared by flattening them onto a common basis of
unit-scale atoms (``flatten_kernel``); the L₂ norm of the flattened kernel is
then an exact Gram-matrix quadratic form.
"""
import logging
from collections.abc import Callable, Sequence

import numpy as np

from algebra.atoms import FunctionLike, canonical_atom, evaluate, pair, sup_norm
from algebra.quadrature import quadrature
from models.atoms import FunctionAtom, Interval, PairingConfig, atom_terms, intersect_all
from models.operators import AffineOperator, KernelSum, Polynomial, SeparableOperator

logger = logging.getLogger(__name__)

_DEFAULT_CFG = PairingConfig()

# Gram eigenvalues below this fraction of the largest belong to dependent atoms.
_GRAM_CUTOFF = 1e-13


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------

def gram_cross(
    X: Sequence[FunctionLike],
    Y: Sequence[FunctionLike],
    G: Interval | None,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> np.ndarray:
    """M[i][j] = Q_G(X_i, Y_j); a zero matrix when G is empty or degenerate."""
    M = np.zeros((len(X), len(Y)))
    if G is None or G.is_degenerate:
        return M
    for i, x in enumerate(X):
        for j, y in enumerate(Y):
            M[i, j] = pair(x, y, G, cfg)
    return M


def inner_gram(A: SeparableOperator, B: SeparableOperator, cfg: PairingConfig = _DEFAULT_CFG) -> np.ndarray:
    """W[j][k] = ∫_{G_A} c_j(τ) I_{B.left_support}(τ) b_k(τ) dτ, the pairing inside A·B."""
    return gram_cross(A.right, B.left, A.domain.intersect(B.left_support), cfg)


# ---------------------------------------------------------------------------
# Composition, powers, functional calculus
# ---------------------------------------------------------------------------

def compose(A: SeparableOperator, B: SeparableOperator, cfg: PairingConfig = _DEFAULT_CFG) -> SeparableOperator:
    """The product A·B (apply B first)."""
    W = inner_gram(A, B, cfg)
    return SeparableOperator.from_matrix(A.left, A.matrix @ W @ B.matrix, B.right, B.domain, A.left_support)


def power(A: SeparableOperator, m: int, cfg: PairingConfig = _DEFAULT_CFG) -> SeparableOperator:
    """A^m = C (M C)^(m-1) with M the self-pairing of A."""
    if m < 1:
        raise ValueError(f"power needs m >= 1, got {m}")
    if m == 1:
        return A
    MC = inner_gram(A, A, cfg) @ A.matrix
    return A.with_matrix(A.matrix @ np.linalg.matrix_power(MC, m - 1))


def poly_eval(F: Polynomial, A: SeparableOperator, cfg: PairingConfig = _DEFAULT_CFG) -> AffineOperator:
    """F(A) = δ₀ I + Σ_{j≥1} δ_j A^j, accumulated by Horner's scheme."""
    C = A.matrix
    if F.degree == 0:
        return AffineOperator(scalar=F.constant, sep=zero_like(A))
    MC = inner_gram(A, A, cfg) @ C
    r = C.shape[1]
    acc = F.coeffs[-1] * np.eye(r)
    for delta in reversed(F.coeffs[1:-1]):
        acc = acc @ MC + delta * np.eye(r)
    return AffineOperator(scalar=F.constant, sep=A.with_matrix(C @ acc))


def scale_operator(A: SeparableOperator, c: float) -> SeparableOperator:
    return A.with_matrix(c * A.matrix)


def zero_like(A: SeparableOperator) -> SeparableOperator:
    return A.with_matrix(np.zeros_like(A.matrix))


def compose_affine(B: SeparableOperator, FA: AffineOperator, cfg: PairingConfig = _DEFAULT_CFG) -> KernelSum:
    """B·F(A) = δ₀ B + B·sep as a two-term kernel sum."""
    return KernelSum.of((1, scale_operator(B, FA.scalar)), (1, compose(B, FA.sep, cfg)))


def commutator(A: SeparableOperator, B: SeparableOperator, cfg: PairingConfig = _DEFAULT_CFG) -> KernelSum:
    return KernelSum.of((1, compose(A, B, cfg)), (-1, compose(B, A, cfg)))


# ---------------------------------------------------------------------------
# Canonical kernel form
# ---------------------------------------------------------------------------

class FlatKernel:
    """Σ_{p,q} coeff[p][q] left[p](t) right[q](s) with distinct unit-scale atoms."""

    def __init__(self, left: list[FunctionAtom], right: list[FunctionAtom], coeff: np.ndarray):
        self.left = left
        self.right = right
        self.coeff = coeff

    @property
    def is_empty(self) -> bool:
        return not self.left or not self.right


def _canonical_terms(f: FunctionLike, region: Interval) -> list[tuple[FunctionAtom, float]]:
    out = []
    for atom in atom_terms(f):
        restriction = intersect_all(region, atom.restriction)
        if restriction is None or restriction.is_degenerate:
            continue
        unit, factor = canonical_atom(atom)
        if unit is None:
            continue
        out.append((unit.with_restriction(restriction), factor))
    return out


def _atom_order(atom: FunctionAtom) -> tuple:
    return (atom.kind, atom.omega or 0.0, atom.exponent or 0, atom.restriction.lo, atom.restriction.hi)


def flatten_many(
    sums: Sequence[KernelSum],
    t_region: Interval,
    s_region: Interval,
    keep_zeros: bool = False,
) -> tuple[list[FunctionAtom], list[FunctionAtom], list[np.ndarray]]:
    """Flatten several kernel sums onto one shared, sorted atom basis.

    Left functions are cut to each term's left support, right functions to the
    term's domain, so every matrix represents its kernel exactly on the region.
    With ``keep_zeros`` atoms carrying a zero coefficient stay in the basis, so
    the basis depends only on the atoms and not on the coefficient values.
    """
    entries: list[list[tuple[FunctionAtom, FunctionAtom, float]]] = []
    lefts_seen: set[FunctionAtom] = set()
    rights_seen: set[FunctionAtom] = set()
    for K in sums:
        found = []
        for term in K.terms:
            op = term.op
            t_cut = intersect_all(t_region, op.left_support)
            s_cut = intersect_all(s_region, op.domain)
            if t_cut is None or s_cut is None or t_cut.is_degenerate or s_cut.is_degenerate:
                continue
            lefts = [_canonical_terms(f, t_cut) for f in op.left]
            rights = [_canonical_terms(g, s_cut) for g in op.right]
            for i, row in enumerate(op.coeff):
                for j, c in enumerate(row):
                    if c == 0.0 and not keep_zeros:
                        continue
                    for lu, lf in lefts[i]:
                        for ru, rf in rights[j]:
                            found.append((lu, ru, term.sign * c * lf * rf))
        for lu, ru, v in found:
            if v != 0.0 or keep_zeros:
                lefts_seen.add(lu)
                rights_seen.add(ru)
        entries.append(found)
    left = sorted(lefts_seen, key=_atom_order)
    right = sorted(rights_seen, key=_atom_order)
    left_index = {atom: p for p, atom in enumerate(left)}
    right_index = {atom: q for q, atom in enumerate(right)}
    matrices = []
    for found in entries:
        coeff = np.zeros((len(left), len(right)))
        for lu, ru, v in found:
            if lu in left_index and ru in right_index:
                coeff[left_index[lu], right_index[ru]] += v
        matrices.append(coeff)
    return left, right, matrices


def flatten_kernel(K: KernelSum, t_region: Interval, s_region: Interval) -> FlatKernel:
    """Canonical form of K on t_region × s_region, equal atoms merged."""
    left, right, (coeff,) = flatten_many([K], t_region, s_region)
    return FlatKernel(left, right, coeff)


def gram_root(G: np.ndarray, rel_cutoff: float = _GRAM_CUTOFF) -> np.ndarray:
    """R with RᵀR = G, dropping eigen-directions below rel_cutoff·λ_max."""
    if G.size == 0:
        return G
    eigvals, eigvecs = np.linalg.eigh(0.5 * (G + G.T))
    top = float(np.max(eigvals, initial=0.0))
    keep = eigvals > rel_cutoff * top
    return np.sqrt(eigvals[keep])[:, None] * eigvecs[:, keep].T


def kernel_l2_norm_sq(
    K: KernelSum,
    t_region: Interval,
    s_region: Interval,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> float:
    """‖K‖² on t_region × s_region from Gram matrices of the flattened kernel.

    Evaluated as ‖R_t C R_sᵀ‖²_F with R the Gram square roots, so the result is
    never negative and cancellation happens before squaring.
    """
    flat = flatten_kernel(K, t_region, s_region)
    if flat.is_empty:
        return 0.0
    Rt = gram_root(gram_cross(flat.left, flat.left, t_region, cfg))
    Rs = gram_root(gram_cross(flat.right, flat.right, s_region, cfg))
    return float(np.sum((Rt @ flat.coeff @ Rs.T) ** 2))


def _midpoints(region: Interval, n: int) -> np.ndarray:
    h = region.length / n
    points = region.lo + h * (np.arange(n) + 0.5)
    # Laurent atoms refuse t = 0 even outside their restriction
    return points[points != 0.0]


def kernel_grid_max(K: KernelSum, t_region: Interval, s_region: Interval, n: int = 20) -> float:
    """max |K(t, s)| over an n×n midpoint grid of the region."""
    flat = flatten_kernel(K, t_region, s_region)
    if flat.is_empty or t_region.is_degenerate or s_region.is_degenerate:
        return 0.0
    t = _midpoints(t_region, n)
    s = _midpoints(s_region, n)
    Lt = np.stack([evaluate(f, t) for f in flat.left], axis=1)
    Rs = np.stack([evaluate(g, s) for g in flat.right], axis=1)
    return float(np.max(np.abs(Lt @ flat.coeff @ Rs.T), initial=0.0))


# ---------------------------------------------------------------------------
# Scales and application
# ---------------------------------------------------------------------------

def operator_scale(A: SeparableOperator) -> float:
    """‖C‖_F · max sup|left| on the support · max sup|right| on the domain."""
    left = max(sup_norm(f, A.left_support) for f in A.left)
    right = max(sup_norm(g, A.domain) for g in A.right)
    return float(np.linalg.norm(A.matrix)) * left * right


def kernel_scale(K: KernelSum) -> float:
    return sum(operator_scale(t.op) for t in K.terms)


def apply_operator(
    A: SeparableOperator,
    x: Callable[[np.ndarray], np.ndarray],
    t: float | np.ndarray,
    cfg: PairingConfig = _DEFAULT_CFG,
) -> float | np.ndarray:
    """(Ax)(t) with the right-hand integrals taken by quadrature."""
    moments = np.zeros(len(A.right))
    for j, g in enumerate(A.right):
        for atom in atom_terms(g):
            region = intersect_all(A.domain, atom.restriction)
            moments[j] += quadrature(lambda s, a=atom: evaluate(a, s) * x(s), region, cfg)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    L = np.stack([evaluate(f, t_arr) for f in A.left], axis=1)
    inside = (t_arr >= A.left_support.lo) & (t_arr <= A.left_support.hi)
    values = np.where(inside, L @ (A.matrix @ moments), 0.0)
    if np.ndim(t) == 0:
        return float(values[0])
    return values
