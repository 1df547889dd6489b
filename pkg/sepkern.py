#!/usr/bin/env python3
"""sepkern: separable-kernel operators and the relation AB = B·F(A).

Usage:
    python sepkern.py check --scenario scenarios/example3_check.json
    python sepkern.py run --scenario scenarios/example3_perturbed.json --json out/report.json
    python sepkern.py reproduce example3-projection
    python sepkern.py list-families

Exit codes: 0 success (or the scenario's expectation met), 1 a check failed,
2 invalid input or a numerical error.
"""
import json
import logging
import sys
from pathlib import Path
from typing import Optional

sys.path.insert(0, str(Path(__file__).resolve().parent))

import typer
import yaml
from pydantic import ValidationError

from algebra.errors import NumericalError
from models.reports import ScenarioOutcome
from models.scenario import Command, Scenario
from pipeline import render, reproduce, scenarios
from pipeline.families import list_families, load_registry
from settings import Settings

logger = logging.getLogger("sepkern")

app = typer.Typer(add_completion=False, help="Separable-kernel operators and the covariance relation AB = B·F(A).")

_INPUT_ERRORS = (ValidationError, ValueError, json.JSONDecodeError, yaml.YAMLError, FileNotFoundError, NumericalError)

ScenarioOption = typer.Option(..., "--scenario", help="Scenario file (JSON, or YAML by extension)")
TolOption = typer.Option(None, "--tol", help="Verdict tolerance (overrides scenario and SEPKERN_TOL)")
SeedOption = typer.Option(None, "--seed", help="Random seed for draws and reproductions")
JsonOption = typer.Option(None, "--json", help="Write the JSON report to this path")


@app.callback()
def main() -> None:
    settings = Settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s  %(levelname)-8s  %(name)s  %(message)s",
        datefmt="%H:%M:%S",
    )


def _emit(outcome: ScenarioOutcome, json_out: Optional[Path]) -> None:
    typer.echo(render.render_text(outcome))
    if json_out is not None:
        render.write_json(outcome, json_out)
    raise typer.Exit(outcome.exit_code)


def _run_scenario(path: Path, command: Command | None, tol: Optional[float], seed: Optional[int], json_out: Optional[Path]) -> None:
    settings = Settings()
    try:
        scenario = Scenario.load(path, command)
        outcome = scenarios.run(settings, scenario, tol=tol, seed=seed)
    except _INPUT_ERRORS as exc:
        logger.error("%s: %s", path, exc)
        raise typer.Exit(2)
    _emit(outcome, json_out)


# ---------------------------------------------------------------------------
# Scenario commands
# ---------------------------------------------------------------------------

@app.command()
def pair(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
         seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """Pairing Q_G(u, v) of the scenario's functions u and v."""
    _run_scenario(scenario, "pair", tol, seed, json_out)


@app.command()
def compose(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
            seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """Product AB as a separable operator."""
    _run_scenario(scenario, "compose", tol, seed, json_out)


@app.command()
def power(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
          seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """Power A^m (m from the scenario options)."""
    _run_scenario(scenario, "power", tol, seed, json_out)


@app.command()
def check(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
          seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """Decide AB = B·F(A) on all three regions."""
    _run_scenario(scenario, "check", tol, seed, json_out)


@app.command("solve-b")
def solve_b(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
            seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """All B of the template satisfying the relation for the given A."""
    _run_scenario(scenario, "solve_b", tol, seed, json_out)


@app.command("solve-a")
def solve_a(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
            seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """Roots of the relation in A's template parameters for the given B."""
    _run_scenario(scenario, "solve_a", tol, seed, json_out)


@app.command()
def commutator(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
               seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """Norm of AB − BA; passes when A and B commute."""
    _run_scenario(scenario, "commutator", tol, seed, json_out)


@app.command()
def run(scenario: Path = ScenarioOption, tol: Optional[float] = TolOption,
        seed: Optional[int] = SeedOption, json_out: Optional[Path] = JsonOption) -> None:
    """Run the command named in the scenario file."""
    _run_scenario(scenario, None, tol, seed, json_out)


# ---------------------------------------------------------------------------
# Reproductions and the family registry
# ---------------------------------------------------------------------------

@app.command("reproduce")
def reproduce_command(
    reproduction_id: str = typer.Argument(..., help="Reproduction or family id (see list-families)"),
    tol: Optional[float] = TolOption,
    seed: Optional[int] = SeedOption,
    json_out: Optional[Path] = JsonOption,
) -> None:
    """Re-derive a worked example, closed form or registered family."""
    settings = Settings()
    updates = {k: v for k, v in (("tol", tol), ("seed", seed)) if v is not None}
    try:
        report = reproduce.run(settings.model_copy(update=updates), reproduction_id)
    except _INPUT_ERRORS as exc:
        logger.error("reproduce %s: %s", reproduction_id, exc)
        raise typer.Exit(2)
    _emit(ScenarioOutcome(command="reproduce", passed=report.passed, reproduction=report), json_out)


@app.command("list-families")
def list_families_command() -> None:
    """Registered solution families, one per line."""
    settings = Settings()
    for family_id, description in list_families(load_registry(settings.families_path)):
        typer.echo(f"{family_id}  {description}")


if __name__ == "__main__":
    app()
