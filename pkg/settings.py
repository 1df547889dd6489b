from pathlib import Path
from typing import Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from models.atoms import PairingConfig

_PACKAGE_DIR = Path(__file__).resolve().parent


class Settings(BaseSettings):
    # Pairing / quadrature
    quad_nodes: int = 32
    quad_tol: float = 1e-12
    quad_max_depth: int = 12
    pairing_method: Literal["closed_form_first", "quadrature_only"] = "closed_form_first"

    # Verdicts and solvers
    tol: float = 1e-10
    rank_tol: float = 1e-9
    newton_max_iter: int = 100
    newton_lattice: bool = True
    dedup_distance: float = 1e-6
    grid_points: int = 20

    # Reproductions
    family_draws: int = 5
    seed: int = 0

    data_dir: Path = _PACKAGE_DIR / "data"
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="SEPKERN_",
        env_file_encoding="utf-8",
    )

    @field_validator("quad_nodes")
    @classmethod
    def quad_nodes_at_least_two(cls, v: int) -> int:
        if v < 2:
            raise ValueError("quad_nodes must be at least 2")
        return v

    @field_validator("quad_tol", "tol", "rank_tol", "dedup_distance")
    @classmethod
    def tolerance_must_be_positive(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("tolerances must be strictly positive")
        return v

    @field_validator("quad_max_depth", "newton_max_iter", "family_draws")
    @classmethod
    def count_must_be_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("grid_points")
    @classmethod
    def grid_needs_two_points(cls, v: int) -> int:
        if v < 2:
            raise ValueError("grid_points must be at least 2")
        return v

    @field_validator("log_level")
    @classmethod
    def log_level_must_be_known(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR"}:
            raise ValueError("log_level must be one of DEBUG, INFO, WARNING, ERROR")
        return level

    @property
    def families_path(self) -> Path:
        return self.data_dir / "families.json"

    @property
    def pairing_config(self) -> PairingConfig:
        return PairingConfig(
            method=self.pairing_method,
            quad_nodes=self.quad_nodes,
            quad_tol=self.quad_tol,
            max_depth=self.quad_max_depth,
        )
