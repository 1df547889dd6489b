"""Text and JSON rendering of scenario outcomes.

Writes: <path> (JSON, when requested)

The text form comes from ``templates/report.txt.j2``.  JSON output has no
timestamps, so identical inputs give byte-identical files.
"""
import logging
from pathlib import Path

from jinja2 import Environment, FileSystemLoader

from models.reports import ScenarioOutcome

logger = logging.getLogger(__name__)

# Path (relative to the package root) where Jinja2 looks for templates
_TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"


def _sci(value: float | None) -> str:
    return "-" if value is None else f"{value:.3e}"


def render_text(outcome: ScenarioOutcome) -> str:
    env = Environment(
        loader=FileSystemLoader(str(_TEMPLATE_DIR)),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters["sci"] = _sci
    template = env.get_template("report.txt.j2")
    return template.render(outcome=outcome, matrix=outcome.operator.matrix.tolist() if outcome.operator else None)


def write_json(outcome: ScenarioOutcome, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(outcome.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")
    logger.info("  report written to %s", path)
    return path
