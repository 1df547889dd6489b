from typing import Literal

from pydantic import BaseModel, Field, computed_field

from models.operators import SeparableOperator

CheckMethod = Literal["general", "rank_one", "orthogonality", "commutativity", "coefficient_model"]


class CovarianceReport(BaseModel):
    """Verdict on AB = B·F(A) with the residual of each of the three regions.

    Residuals are squared L₂ norms.  ``threshold`` is ``(tolerance_used·(1 + scale))²``,
    the bound every residual is compared against.
    """

    holds: bool
    residual_on_G: float = Field(ge=0.0)
    residual_on_GA_minus_G: float = Field(default=0.0, ge=0.0)
    residual_on_GB_minus_G: float = Field(default=0.0, ge=0.0)
    tolerance_used: float = Field(gt=0.0)
    method: CheckMethod = "general"
    scale: float = 0.0
    threshold: float = 0.0
    grid_max: float = 0.0
    identities: dict[str, bool] = Field(default_factory=dict)
    details: dict[str, float] = Field(default_factory=dict)
    family_id: str | None = None

    @computed_field
    @property
    def violated_conditions(self) -> list[int]:
        residuals = (self.residual_on_G, self.residual_on_GA_minus_G, self.residual_on_GB_minus_G)
        return [i + 1 for i, r in enumerate(residuals) if r > self.threshold]

    @computed_field
    @property
    def passed(self) -> bool:
        return self.holds and all(self.identities.values())


class SolveResult(BaseModel):
    kind: Literal["nullspace", "roots", "family"]
    params: list[str] = Field(default_factory=list)
    vectors: list[list[float]] = Field(default_factory=list)
    nullspace_dim: int = Field(default=0, ge=0)
    residuals: list[float] = Field(default_factory=list)
    singular_values: list[float] = Field(default_factory=list)


class CheckResult(BaseModel):
    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None


class ReproductionReport(BaseModel):
    id: str
    description: str = ""
    checks: list[CheckResult] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, value: float | None = None, threshold: float | None = None) -> None:
        self.checks.append(CheckResult(name=name, passed=bool(passed), value=value, threshold=threshold))


class ScenarioOutcome(BaseModel):
    """Result of running one scenario; exactly one payload field is set per command."""

    command: str
    passed: bool
    expect: Literal["pass", "fail"] | None = None
    value: float | None = None
    operator: SeparableOperator | None = None
    covariance: CovarianceReport | None = None
    solve: SolveResult | None = None
    reproduction: ReproductionReport | None = None

    @computed_field
    @property
    def exit_code(self) -> int:
        if self.expect is None:
            return 0 if self.passed else 1
        return 0 if self.passed == (self.expect == "pass") else 1
