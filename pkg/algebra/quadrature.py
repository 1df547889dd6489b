"""Composite Gauss–Legendre quadrature with panel doubling.

Used as the fallback for pairings without a closed form (mixed trig × power
products) and as the independent oracle in tests.  The panel count is doubled
until two successive estimates agree to ``quad_tol·(1 + |estimate|)``.
"""
import logging
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from algebra.errors import NumericalError
from models.atoms import Interval, PairingConfig

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _reference_rule(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if n_nodes < 2:
        raise ValueError("At least 2 nodes required for Gauss-Legendre quadrature")
    nodes, weights = roots_legendre(n_nodes)
    return np.asarray(nodes, dtype=float), np.asarray(weights, dtype=float)


def composite_gauss_legendre(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n_nodes: int,
    panels: int,
) -> float:
    """Fixed composite rule: ``panels`` equal panels with ``n_nodes`` nodes each."""
    x, w = _reference_rule(n_nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    values = np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"integrand is not finite on [{lo}, {hi}]")
    weights = (half[:, None] * w[None, :]).ravel()
    return float(np.dot(weights, values))


def quadrature(
    f: Callable[[np.ndarray], np.ndarray],
    G: Interval | None,
    cfg: PairingConfig,
) -> float:
    """Integrate a vectorised ``f`` over G by composite Gauss–Legendre.

    An empty or degenerate G integrates to 0.  Raises NumericalError when the
    estimate has not settled after ``cfg.max_depth`` doublings.
    """
    if G is None or G.is_degenerate:
        return 0.0
    panels = 1
    previous = composite_gauss_legendre(f, G.lo, G.hi, cfg.quad_nodes, panels)
    change = float("inf")
    for _ in range(cfg.max_depth):
        panels *= 2
        current = composite_gauss_legendre(f, G.lo, G.hi, cfg.quad_nodes, panels)
        change = abs(current - previous)
        if change <= cfg.quad_tol * (1.0 + abs(current)):
            return current
        previous = current
    raise NumericalError(
        f"Gauss-Legendre quadrature on [{G.lo}, {G.hi}] did not converge: "
        f"{panels} panels of {cfg.quad_nodes} nodes, last change {change:.3e}, "
        f"tolerance {cfg.quad_tol:.1e}"
    )
