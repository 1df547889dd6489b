"""Run a Scenario: dispatch its command to the algebra and wrap the result.

Tolerances and seeds resolve in the order CLI flag → scenario options →
Settings.
"""
import logging
import math

from algebra.atoms import pair
from algebra.covariance import check_covariance, is_kernel_zero, kernel_norm
from algebra.operator_core import commutator, compose, power
from algebra.solver import solve_for_A_given_B, solve_for_B_given_A
from models.reports import ScenarioOutcome
from models.scenario import Scenario
from pipeline import reproduce
from settings import Settings

logger = logging.getLogger(__name__)


def run(
    settings: Settings,
    scenario: Scenario,
    tol: float | None = None,
    seed: int | None = None,
) -> ScenarioOutcome:
    options = scenario.options
    tol = tol or options.tol or settings.tol
    seed = seed if seed is not None else options.seed if options.seed is not None else settings.seed
    rank_tol = options.rank_tol or settings.rank_tol
    cfg = settings.pairing_config
    ops = scenario.operators
    outcome = {"command": scenario.command, "expect": scenario.expect}

    logger.info("=== Scenario: %s ===", scenario.command)
    if scenario.command == "pair":
        value = pair(scenario.functions["u"], scenario.functions["v"], options.interval, cfg)
        return ScenarioOutcome(**outcome, passed=math.isfinite(value), value=value)

    if scenario.command == "compose":
        return ScenarioOutcome(**outcome, passed=True, operator=compose(ops["A"], ops["B"], cfg))

    if scenario.command == "power":
        return ScenarioOutcome(**outcome, passed=True, operator=power(ops["A"], options.m, cfg))

    if scenario.command == "check":
        report = check_covariance(ops["A"], ops["B"], scenario.polynomial, tol, cfg, settings.grid_points)
        logger.info("  relation %s (residual on G %.3e)", "holds" if report.holds else "fails", report.residual_on_G)
        return ScenarioOutcome(**outcome, passed=report.passed, covariance=report)

    if scenario.command == "commutator":
        K = commutator(ops["A"], ops["B"], cfg)
        return ScenarioOutcome(**outcome, passed=is_kernel_zero(K, tol, cfg), value=kernel_norm(K, cfg))

    if scenario.command == "solve_b":
        result = solve_for_B_given_A(ops["A"], scenario.polynomial, scenario.templates["B"], rank_tol, tol, cfg)
        logger.info("  nullspace dimension %d", result.nullspace_dim)
        return ScenarioOutcome(**outcome, passed=result.nullspace_dim >= 1, solve=result)

    if scenario.command == "solve_a":
        result = solve_for_A_given_B(
            ops["B"], scenario.polynomial, scenario.templates["A"],
            seeds=options.seeds or None, tol=tol, cfg=cfg,
            lattice=options.lattice and settings.newton_lattice,
            max_iter=settings.newton_max_iter, dedup_distance=settings.dedup_distance,
        )
        return ScenarioOutcome(**outcome, passed=bool(result.vectors), solve=result)

    report = reproduce.run(settings.model_copy(update={"seed": seed, "tol": tol}), options.reproduction)
    return ScenarioOutcome(**outcome, passed=report.passed, reproduction=report)
