"""Function atoms and the intervals they live on.

An atom is one closed-form real function: a constant, sin(ωt), cos(ωt), a
monomial t^k or a Laurent monomial t^(-k), times a scale and optionally times
the indicator of a restriction interval.  Kernels of separable operators are
built from atoms and finite sums of atoms (``CompoundFunction``).

JSON form of an atom::

    {"kind": "sin", "omega": 3.14, "scale": 1.0, "restriction": {"lo": 0, "hi": 1}}

``omega`` only appears for sin/cos, ``exponent`` only for monomial/laurent, and
``restriction`` is omitted when the atom is unrestricted.
"""
import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

AtomKind = Literal["constant", "sin", "cos", "monomial", "laurent"]


class Interval(BaseModel):
    """Closed bounded interval [lo, hi]; lo == hi is allowed and has measure zero."""

    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @model_validator(mode="after")
    def bounds_are_ordered(self) -> "Interval":
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval bounds must be finite")
        if self.lo > self.hi:
            raise ValueError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")
        return self

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_degenerate(self) -> bool:
        return self.hi <= self.lo

    @property
    def excludes_zero(self) -> bool:
        return self.lo > 0.0 or self.hi < 0.0

    def intersect(self, other: "Interval | None") -> "Interval | None":
        """Intersection with ``other`` (None means unrestricted). Returns None when empty."""
        if other is None:
            return self
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo=lo, hi=hi)

    def difference(self, other: "Interval | None") -> list["Interval"]:
        """Closures of the pieces of self minus other, dropping zero-measure pieces."""
        if other is None:
            return []
        overlap = self.intersect(other)
        if overlap is None or overlap.is_degenerate:
            return [] if self.is_degenerate else [self]
        pieces = []
        if self.lo < overlap.lo:
            pieces.append(Interval(lo=self.lo, hi=overlap.lo))
        if overlap.hi < self.hi:
            pieces.append(Interval(lo=overlap.hi, hi=self.hi))
        return pieces


def intersect_all(*intervals: Interval | None) -> Interval | None:
    """Intersect any number of optional intervals; None entries mean 'unrestricted'.

    Raises ValueError when every entry is None (the result would be unbounded).
    """
    result: Interval | None = None
    bounded = False
    for interval in intervals:
        if interval is None:
            continue
        if not bounded:
            result, bounded = interval, True
            continue
        result = result.intersect(interval) if result is not None else None
        if result is None:
            return None
    if not bounded:
        raise ValueError("cannot intersect only unrestricted intervals")
    return result


def interval_union(intervals: list[Interval]) -> list[Interval]:
    """Merge overlapping intervals into a sorted list of disjoint intervals."""
    ordered = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
    merged: list[Interval] = []
    for interval in ordered:
        if merged and interval.lo <= merged[-1].hi:
            last = merged[-1]
            merged[-1] = Interval(lo=last.lo, hi=max(last.hi, interval.hi))
        else:
            merged.append(interval)
    return merged


class FunctionAtom(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: AtomKind
    omega: float | None = None
    exponent: int | None = None
    scale: float = 1.0
    restriction: Interval | None = None

    @model_validator(mode="after")
    def parameters_match_kind(self) -> "FunctionAtom":
        if not math.isfinite(self.scale):
            raise ValueError("atom scale must be finite")
        if self.kind in ("sin", "cos"):
            if self.omega is None or not math.isfinite(self.omega):
                raise ValueError(f"{self.kind} atom needs a finite omega")
            if self.exponent is not None:
                raise ValueError(f"{self.kind} atom takes no exponent")
        elif self.kind in ("monomial", "laurent"):
            if self.omega is not None:
                raise ValueError(f"{self.kind} atom takes no omega")
            if self.exponent is None:
                raise ValueError(f"{self.kind} atom needs an exponent")
            if self.kind == "monomial" and self.exponent < 0:
                raise ValueError("monomial exponent must be non-negative")
            if self.kind == "laurent":
                if self.exponent < 1:
                    raise ValueError("laurent exponent must be a positive integer")
                if self.restriction is None or not self.restriction.excludes_zero:
                    raise ValueError("laurent atom needs a restriction interval that excludes 0")
        elif self.omega is not None or self.exponent is not None:
            raise ValueError("constant atom takes neither omega nor exponent")
        return self

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, scale: float = 1.0, restriction: Interval | None = None) -> "FunctionAtom":
        return cls(kind="constant", scale=scale, restriction=restriction)

    @classmethod
    def sin(cls, omega: float, scale: float = 1.0, restriction: Interval | None = None) -> "FunctionAtom":
        return cls(kind="sin", omega=omega, scale=scale, restriction=restriction)

    @classmethod
    def cos(cls, omega: float, scale: float = 1.0, restriction: Interval | None = None) -> "FunctionAtom":
        return cls(kind="cos", omega=omega, scale=scale, restriction=restriction)

    @classmethod
    def monomial(cls, k: int, scale: float = 1.0, restriction: Interval | None = None) -> "FunctionAtom":
        return cls(kind="monomial", exponent=k, scale=scale, restriction=restriction)

    @classmethod
    def laurent(cls, k: int, restriction: Interval, scale: float = 1.0) -> "FunctionAtom":
        return cls(kind="laurent", exponent=k, scale=scale, restriction=restriction)

    # -- derived ------------------------------------------------------------

    @property
    def power(self) -> int | None:
        """Exponent p of t^p for the power-law kinds (constant counts as p = 0)."""
        if self.kind == "constant":
            return 0
        if self.kind == "monomial":
            return self.exponent
        if self.kind == "laurent":
            return -self.exponent
        return None

    @property
    def is_trig(self) -> bool:
        return self.kind in ("constant", "sin", "cos")

    @property
    def is_power(self) -> bool:
        return self.kind in ("constant", "monomial", "laurent")

    def with_scale(self, scale: float) -> "FunctionAtom":
        return self.model_copy(update={"scale": scale})

    def with_restriction(self, restriction: Interval | None) -> "FunctionAtom":
        return self.model_copy(update={"restriction": restriction})


class CompoundFunction(BaseModel):
    """A finite sum of atoms, e.g. 4s - 3 = 4·Monomial(1) + (-3)·Constant."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["sum"] = "sum"
    terms: tuple[FunctionAtom, ...]

    @field_validator("terms")
    @classmethod
    def needs_a_term(cls, v: tuple[FunctionAtom, ...]) -> tuple[FunctionAtom, ...]:
        if not v:
            raise ValueError("a compound function needs at least one term")
        return v


Function = Annotated[Union[FunctionAtom, CompoundFunction], Field(discriminator="kind")]


def atom_terms(f: FunctionAtom | CompoundFunction) -> tuple[FunctionAtom, ...]:
    """The atoms of a function; a plain atom is its own single term."""
    if isinstance(f, CompoundFunction):
        return f.terms
    return (f,)


class PairingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["closed_form_first", "quadrature_only"] = "closed_form_first"
    quad_nodes: int = Field(default=32, ge=2)
    quad_tol: float = Field(default=1e-12, gt=0.0)
    max_depth: int = Field(default=12, ge=1)
