"""Golden-section search on a bracketing interval."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

from parityqht.linalg import NumericalError

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2

MAX_ITERATIONS = 200


@dataclass(frozen=True)
class SearchResult:
    x: float
    fx: float
    iterations: int
    bracket: tuple[float, float]


def golden_section_max(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-13,
    max_iterations: int = MAX_ITERATIONS,
) -> SearchResult:
    """Maximize a unimodal ``f`` on [a, b].

    Stops once the bracket is narrower than ``tol * (1 + |x|)``. Raises
    NumericalError with the last bracket if that takes more than
    ``max_iterations`` steps.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol * (1 + abs(b)):
        x = (a + b) / 2
        return SearchResult(x, f(x), 0, (a, b))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for k in range(1, max_iterations + 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
        if h <= tol * (1 + abs(c)):
            x, fx = (c, yc) if yc > yd else (d, yd)
            logger.debug("golden section converged after %d iterations at x=%.15g", k, x)
            return SearchResult(x, fx, k, (a, b))

    raise NumericalError(
        f"golden-section search did not converge in {max_iterations} iterations",
        {"bracket": [a, b], "iterations": max_iterations, "tolerance": tol},
    )

