"""Separable-kernel operators and the values built from them.

A ``SeparableOperator`` is

    (Ax)(t) = I_{left_support}(t) ∫_domain Σ_{i,j} coeff[i][j] left_i(t) right_j(s) x(s) ds

so a diagonal coefficient matrix gives the familiar Σ a_i(t) c_i(s) form and a
general matrix covers kernels written with several index families.

JSON form::

    {"left": [atoms], "coeff": [[...]], "right": [atoms],
     "domain": {"lo": 0, "hi": 1}, "left_support": {"lo": 0, "hi": 1}}
"""
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from models.atoms import Function, Interval
from utils.expressions import affine_coefficients


def _check_shape(n_left: int, n_right: int, coeff: tuple[tuple, ...]) -> None:
    if n_left < 1 or n_right < 1:
        raise ValueError("an operator needs at least one left and one right function")
    if len(coeff) != n_left or any(len(row) != n_right for row in coeff):
        raise ValueError(f"coeff must be a {n_left}×{n_right} matrix")


class SeparableOperator(BaseModel):
    model_config = ConfigDict(frozen=True)

    left: tuple[Function, ...]
    coeff: tuple[tuple[float, ...], ...]
    right: tuple[Function, ...]
    domain: Interval
    left_support: Interval

    @model_validator(mode="after")
    def coeff_matches_atoms(self) -> "SeparableOperator":
        _check_shape(len(self.left), len(self.right), self.coeff)
        if not all(math.isfinite(c) for row in self.coeff for c in row):
            raise ValueError("coeff entries must be finite")
        return self

    @classmethod
    def from_matrix(
        cls,
        left,
        matrix: np.ndarray,
        right,
        domain: Interval,
        left_support: Interval,
    ) -> "SeparableOperator":
        matrix = np.asarray(matrix, dtype=float)
        return cls(
            left=tuple(left),
            coeff=tuple(tuple(float(c) for c in row) for row in matrix),
            right=tuple(right),
            domain=domain,
            left_support=left_support,
        )

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.coeff, dtype=float)

    def with_matrix(self, matrix: np.ndarray) -> "SeparableOperator":
        return SeparableOperator.from_matrix(self.left, matrix, self.right, self.domain, self.left_support)


class Polynomial(BaseModel):
    """F(z) = Σ δ_j z^j, coefficients in ascending order; trailing zeros are trimmed."""

    model_config = ConfigDict(frozen=True)

    coeffs: tuple[float, ...] = (0.0, 1.0)

    @field_validator("coeffs")
    @classmethod
    def trim_trailing_zeros(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not all(math.isfinite(c) for c in v):
            raise ValueError("polynomial coefficients must be finite")
        trimmed = list(v)
        while len(trimmed) > 1 and trimmed[-1] == 0.0:
            trimmed.pop()
        return tuple(trimmed) if trimmed else (0.0,)

    @classmethod
    def monomial(cls, delta: float, d: int) -> "Polynomial":
        """F(z) = δ z^d."""
        if d < 0:
            raise ValueError("monomial degree must be non-negative")
        return cls(coeffs=(0.0,) * d + (delta,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def constant(self) -> float:
        return self.coeffs[0]

    def __call__(self, z: float) -> float:
        return float(np.polynomial.polynomial.polyval(z, self.coeffs))


class AffineOperator(BaseModel):
    """scalar·I + sep; carries F(A) including its identity term."""

    model_config = ConfigDict(frozen=True)

    scalar: float
    sep: SeparableOperator


class KernelTerm(BaseModel):
    model_config = ConfigDict(frozen=True)

    sign: Literal[1, -1]
    op: SeparableOperator


class KernelSum(BaseModel):
    """Signed sum of separable kernels, possibly over different domains."""

    model_config = ConfigDict(frozen=True)

    terms: tuple[KernelTerm, ...] = ()

    @classmethod
    def of(cls, *signed: tuple[int, SeparableOperator]) -> "KernelSum":
        return cls(terms=tuple(KernelTerm(sign=s, op=op) for s, op in signed))

    @property
    def domains(self) -> list[Interval]:
        return [t.op.domain for t in self.terms]

    @property
    def supports(self) -> list[Interval]:
        return [t.op.left_support for t in self.terms]


class ParamOperator(BaseModel):
    """Operator template whose coefficients depend affinely on named parameters.

    Each coeff entry is a number or an expression string such as ``"b1"`` or
    ``"-2*ln2*g2"``.
    """

    model_config = ConfigDict(frozen=True)

    params: tuple[str, ...]
    left: tuple[Function, ...]
    coeff: tuple[tuple[float | str, ...], ...]
    right: tuple[Function, ...]
    domain: Interval
    left_support: Interval

    @field_validator("params")
    @classmethod
    def params_are_identifiers(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        if len(set(v)) != len(v):
            raise ValueError("parameter names must be unique")
        for name in v:
            if not name.isidentifier():
                raise ValueError(f"parameter name {name!r} is not an identifier")
        return v

    @model_validator(mode="after")
    def entries_are_affine(self) -> "ParamOperator":
        _check_shape(len(self.left), len(self.right), self.coeff)
        for row in self.coeff:
            for entry in row:
                affine_coefficients(entry, self.params)
        return self

    def affine_parts(self) -> tuple[np.ndarray, list[np.ndarray]]:
        """(C0, [C_p]) with coeff(θ) = C0 + Σ_p θ_p C_p."""
        n_left, n_right, n_params = len(self.left), len(self.right), len(self.params)
        constant = np.zeros((n_left, n_right))
        slopes = [np.zeros((n_left, n_right)) for _ in range(n_params)]
        for i, row in enumerate(self.coeff):
            for j, entry in enumerate(row):
                c0, cs = affine_coefficients(entry, self.params)
                constant[i, j] = c0
                for p, c in enumerate(cs):
                    slopes[p][i, j] = c
        return constant, slopes

    @property
    def is_homogeneous(self) -> bool:
        constant, _ = self.affine_parts()
        return not np.any(constant)

    def instantiate(self, theta) -> SeparableOperator:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (len(self.params),):
            raise ValueError(f"expected {len(self.params)} parameters, got shape {theta.shape}")
        constant, slopes = self.affine_parts()
        matrix = constant + sum((t * c for t, c in zip(theta, slopes)), np.zeros_like(constant))
        return SeparableOperator.from_matrix(self.left, matrix, self.right, self.domain, self.left_support)
