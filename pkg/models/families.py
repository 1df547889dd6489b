"""Registry of solution families of AB = δ·B·A².

Each family fixes some coefficients of A and B by expressions in the free
parameters, δ and the pairing constants σ1, σ2, and states which identities
the resulting pair satisfies.  The registry is a versioned JSON asset::

    {"version": 1, "families": [{"id": "case1-item1", ...}, ...]}
"""
import json
import re
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.expressions import parse_expression

Setting = Literal["case1", "trig", "laurent", "projection"]
SigmaMode = Literal["generic", "zero-sigma1", "zero-both", "zero-sigma2"]
DeltaMode = Literal["free", "zero", "one"]
Claim = Literal["relation", "ab_zero", "ba_zero", "ab_eq_ba", "ab_eq_b_over_delta", "a_idempotent"]

COEFF_NAMES = {
    "case1": (("a1", "a2", "a3", "a4"), ("b1", "b2", "b3", "b4")),
    "trig": (("a1", "a2", "a3", "a4"), ("b1", "b2", "b3", "b4")),
    "laurent": (("ga0", "ga1", "ga2", "ga3"), ("gb0", "gb1", "gb2", "gb3")),
    "projection": ((), ("mu",)),
}
CONSTANT_NAMES = ("delta", "sigma1", "sigma2")


class Family(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    description: str
    setting: Setting
    sigma: SigmaMode = "generic"
    delta: DeltaMode = "free"
    free: list[str] = Field(default_factory=list)
    avoid: list[str] = Field(default_factory=list)
    theta_a: list[str | float] = Field(default_factory=list)
    theta_b: list[str | float] = Field(default_factory=list)
    claims: list[Claim] = Field(default_factory=lambda: ["relation"])
    commute_iff: str | None = None

    @field_validator("id")
    @classmethod
    def id_is_slug(cls, v: str) -> str:
        if not re.fullmatch(r"[a-z0-9]+(-[a-z0-9]+)*", v):
            raise ValueError(f"family id {v!r} must be a lowercase slug")
        return v

    @model_validator(mode="after")
    def expressions_resolve(self) -> "Family":
        a_names, b_names = COEFF_NAMES[self.setting]
        if len(self.theta_a) != len(a_names) or len(self.theta_b) != len(b_names):
            raise ValueError(
                f"{self.id}: setting {self.setting} needs {len(a_names)} theta_a and {len(b_names)} theta_b entries"
            )
        if self.sigma != "generic" and self.setting != "trig":
            raise ValueError(f"{self.id}: sigma mode {self.sigma} only applies to the trig setting")
        names = set(self.free) | set(CONSTANT_NAMES) | set(a_names) | set(b_names)
        for entry in [*self.theta_a, *self.theta_b, *self.avoid, *([self.commute_iff] if self.commute_iff else [])]:
            parse_expression(entry, names)
        return self

    @property
    def coefficient_names(self) -> tuple[str, ...]:
        a_names, b_names = COEFF_NAMES[self.setting]
        return a_names + b_names


def _natural_key(family_id: str) -> list:
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", family_id)]


class FamilyRegistry(BaseModel):
    version: Literal[1]
    families: list[Family]

    @model_validator(mode="after")
    def ids_are_unique(self) -> "FamilyRegistry":
        ids = [f.id for f in self.families]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate family ids: {duplicates}")
        return self

    @classmethod
    def load(cls, path: Path) -> "FamilyRegistry":
        return cls.model_validate(json.loads(path.read_text(encoding="utf-8")))

    @property
    def ids(self) -> list[str]:
        return sorted((f.id for f in self.families), key=_natural_key)

    def get(self, family_id: str) -> Family:
        for family in self.families:
            if family.id == family_id:
                return family
        raise ValueError(f"unknown family id {family_id!r}")
