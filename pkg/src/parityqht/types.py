from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import NotRequired, TypedDict


@total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    """A real number or +inf, tagged explicitly rather than via float('inf')."""

    value: float = 0.0
    infinite: bool = False

    @classmethod
    def finite(cls, value: float) -> ExtendedReal:
        if not math.isfinite(value):
            raise ValueError(f"finite ExtendedReal needs a finite value, got {value}")
        return cls(float(value), False)

    @classmethod
    def infinity(cls) -> ExtendedReal:
        return cls(0.0, True)

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExtendedReal):
            return float(self) == float(other)
        if isinstance(other, (int, float)):
            return float(self) == other
        return NotImplemented

    def __lt__(self, other: object) -> bool:
        if isinstance(other, (ExtendedReal, int, float)):
            return float(self) < float(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(float(self))

    def scaled(self, factor: float) -> ExtendedReal:
        """Multiply by a positive finite factor."""
        if self.infinite:
            return self
        return ExtendedReal.finite(self.value * factor)

    def format(self, digits: int = 9) -> str:
        if self.infinite:
            return "inf"
        return f"{self.value:.{digits}g}"


class ToleranceDict(TypedDict):
    classify: float
    duality: float
    eig_residual: float
    hermitian: float


class RecordDict(TypedDict):
    command: str
    p: float | None
    q: float | None
    phi: float | None
    null_kind: str
    alt_kind: str
    n: int | None
    eps: float | None
    beta: float | None
    dhe: ExtendedReal | None
    dhe_over_n: ExtendedReal | None
    case_tag: str | None
    n_eps: int | None
    oracle_beta: float | None
    abs_diff: float | None
    w_even: NotRequired[float | None]
    w_odd: NotRequired[float | None]
    chernoff: NotRequired[ExtendedReal | None]
    qre: NotRequired[ExtendedReal | None]
    n_formula: NotRequired[int | None]
    lower_bound: NotRequired[float | None]
    upper_bound: NotRequired[float | None]
    in_range: NotRequired[bool | None]
