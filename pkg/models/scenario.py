"""Scenario files: the input of every CLI command.

A scenario names its functions, operators and templates and says which
command to run on them::

    {
      "version": 1,
      "command": "check",
      "operators": {"A": {...}, "B": {...}},
      "polynomial": {"coeffs": [0, 0, 1]},
      "expect": "pass"
    }

Each command reads fixed names: ``u``/``v`` (pair), ``A``/``B`` (compose,
check, commutator), ``A`` (power, solve_b), ``B`` (solve_a); solve_b takes
its B template from ``templates.B`` and solve_a its A template from
``templates.A``.  JSON is the primary format; ``.yaml``/``.yml`` files are
read with PyYAML.
"""
import json
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.atoms import Function, Interval
from models.operators import ParamOperator, Polynomial, SeparableOperator

Command = Literal["pair", "compose", "power", "check", "solve_b", "solve_a", "commutator", "reproduce"]

# command → (functions, operators, templates) it reads
_REQUIRED: dict[str, tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]] = {
    "pair": (("u", "v"), (), ()),
    "compose": ((), ("A", "B"), ()),
    "power": ((), ("A",), ()),
    "check": ((), ("A", "B"), ()),
    "solve_b": ((), ("A",), ("B",)),
    "solve_a": ((), ("B",), ("A",)),
    "commutator": ((), ("A", "B"), ()),
    "reproduce": ((), (), ()),
}


class ScenarioOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tol: float | None = Field(default=None, gt=0.0)
    rank_tol: float | None = Field(default=None, gt=0.0)
    seed: int | None = None
    interval: Interval | None = None  # pair: integration interval, None = whole line
    m: int = Field(default=2, ge=1)  # power
    seeds: list[list[float]] = Field(default_factory=list)  # solve_a
    lattice: bool = True  # solve_a
    reproduction: str | None = None  # reproduce: a reproduction or family id


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: Literal[1] = 1
    command: Command
    functions: dict[str, Function] = Field(default_factory=dict)
    operators: dict[str, SeparableOperator] = Field(default_factory=dict)
    templates: dict[str, ParamOperator] = Field(default_factory=dict)
    polynomial: Polynomial = Field(default_factory=Polynomial)
    options: ScenarioOptions = Field(default_factory=ScenarioOptions)
    expect: Literal["pass", "fail"] | None = None

    @model_validator(mode="after")
    def references_resolve(self) -> "Scenario":
        functions, operators, templates = _REQUIRED[self.command]
        for kind, needed, present in (
            ("functions", functions, self.functions),
            ("operators", operators, self.operators),
            ("templates", templates, self.templates),
        ):
            missing = [name for name in needed if name not in present]
            if missing:
                raise ValueError(f"command {self.command!r} needs {kind} {missing}")
        if self.command == "reproduce" and not self.options.reproduction:
            raise ValueError("command 'reproduce' needs options.reproduction")
        return self

    @classmethod
    def load(cls, path: Path, command: Command | None = None) -> "Scenario":
        """Read a JSON or YAML scenario; ``command`` replaces the file's own."""
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
        if command is not None:
            data = {**data, "command": command}
        return cls.model_validate(data)

    def dump(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True)
