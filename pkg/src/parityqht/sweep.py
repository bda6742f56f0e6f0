from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from parityqht.linalg import NumericalError, ResourceLimitError, ValidationError
from parityqht.optimize import MAX_ITERATIONS
from parityqht.parity import (
    CLASSIFY_TOL,
    MAX_CRITICAL_ITERATIONS,
    UnsupportedCaseError,
    classify,
    critical_n_exact,
    restricted_beta,
    theorem3_beta,
    theorem3_critical_n,
)
from parityqht.records import new_record
from parityqht.states import (
    Hypothesis,
    MaxMixed,
    PureQubit,
    ncopy_dense,
    reconstruct_dense,
    trace_distance,
    twirl_dense,
    twirl_pure_analytic,
)
from parityqht.testing import DUALITY_TOL, chernoff_exponent, neg_log2, qre, validate_eps
from parityqht.types import RecordDict

logger = logging.getLogger(__name__)

GRID_COMMANDS = ("beta", "dhe", "theorem1", "theorem3", "sweep")


@dataclass
class SweepStarted:
    command: str
    points: int
    jobs: int


@dataclass
class PointComputed:
    record: RecordDict


@dataclass
class SweepComplete:
    total_points: int


@dataclass(frozen=True)
class SweepPlan:
    """A validated (pair, n, eps) grid and how to evaluate it."""

    command: str
    pairs: tuple[tuple[Hypothesis, Hypothesis], ...]
    ns: tuple[int, ...]
    epss: tuple[float, ...]
    oracle: bool = False
    jobs: int = 1
    tol: float = CLASSIFY_TOL
    max_qubits: int = 10
    max_critical_iterations: int = MAX_CRITICAL_ITERATIONS
    max_search_iterations: int = MAX_ITERATIONS
    duality_tol: float = DUALITY_TOL

    @property
    def points(self) -> int:
        return len(self.pairs) * len(self.ns) * len(self.epss)


def grid_plan(
    command: str,
    pairs: list[tuple[Hypothesis, Hypothesis]],
    ns: list[int],
    epss: list[float],
    *,
    oracle: bool = False,
    jobs: int = 1,
    tol: float = CLASSIFY_TOL,
    max_qubits: int = 10,
    max_points: int = 100_000,
    max_critical_iterations: int = MAX_CRITICAL_ITERATIONS,
    max_search_iterations: int = MAX_ITERATIONS,
    duality_tol: float = DUALITY_TOL,
) -> SweepPlan:
    """Validate a grid and build its plan.

    Raises ValidationError for bad values and ResourceLimitError when the grid
    or a requested dense oracle is too large.
    """
    if command not in GRID_COMMANDS:
        raise ValidationError(f"unknown grid command '{command}'")
    if not pairs or not ns or not epss:
        raise ValidationError("a grid needs at least one pair, one n and one eps")
    if any(n < 1 for n in ns):
        raise ValidationError("every n must be >= 1")
    epss = [validate_eps(e) for e in epss]
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")
    points = len(pairs) * len(ns) * len(epss)
    if points > max_points:
        raise ResourceLimitError(f"grid has {points} points, above the limit {max_points}")
    if oracle and max(ns) > max_qubits:
        raise ResourceLimitError(
            f"dense oracle requested for n={max(ns)}, above the dense cap of {max_qubits} qubits"
        )
    if command == "theorem1":
        for h0, h1 in pairs:
            if not (isinstance(h0, PureQubit) and isinstance(h1, PureQubit)):
                raise ValidationError("theorem1 needs two pure states")
    return SweepPlan(
        command=command,
        pairs=tuple(pairs),
        ns=tuple(sorted(set(ns))),
        epss=tuple(sorted(set(epss))),
        oracle=oracle,
        jobs=jobs,
        tol=tol,
        max_qubits=max_qubits,
        max_critical_iterations=max_critical_iterations,
        max_search_iterations=max_search_iterations,
        duality_tol=duality_tol,
    )


# --- single-point evaluations ---


def _case_tag(h0: Hypothesis, h1: Hypothesis, tol: float) -> str | None:
    if isinstance(h0, PureQubit) and isinstance(h1, PureQubit):
        return classify(h0, h1, tol).tag.value
    return None


def _n_eps(h0: Hypothesis, h1: Hypothesis, eps: float, plan: SweepPlan) -> int | None:
    if plan.command == "theorem3":
        return theorem3_critical_n(eps) if isinstance(h0, MaxMixed) else None
    try:
        return critical_n_exact(h0, h1, eps, plan.tol, plan.max_critical_iterations).n_exact
    except UnsupportedCaseError:
        return None
    except NumericalError as e:
        logger.warning("critical n unavailable for eps=%g: %s", eps, e)
        return None


def evaluate_point(h0: Hypothesis, h1: Hypothesis, n: int, eps: float, plan: SweepPlan, n_eps: int | None) -> RecordDict:
    record = new_record(plan.command, h0, h1)
    record.update({"n": n, "eps": eps, "case_tag": _case_tag(h0, h1, plan.tol), "n_eps": n_eps})
    if isinstance(h0, PureQubit):
        t = twirl_pure_analytic(h0, n)
        record["w_even"], record["w_odd"] = t.w_even, t.w_odd

    search = {"max_iterations": plan.max_search_iterations, "duality_tol": plan.duality_tol}
    numeric = restricted_beta(h0, h1, n, eps, tol=plan.tol, **search)
    if plan.command == "theorem3" and isinstance(h0, PureQubit) and isinstance(h1, MaxMixed):
        closed = theorem3_beta(h0.p, n, eps, **search)
        analytic = closed.value
        record["in_range"] = closed.in_range
        oracle = numeric.beta_min
    else:
        analytic = numeric.beta_min
        oracle = None

    if plan.oracle:
        oracle = restricted_beta(
            h0, h1, n, eps, method="dense", tol=plan.tol, max_qubits=plan.max_qubits, **search
        ).beta_min
    record["beta"] = analytic
    dhe = neg_log2(analytic)
    record["dhe"] = dhe
    record["dhe_over_n"] = dhe.scaled(1 / n)
    if oracle is not None:
        record["oracle_beta"] = oracle
        record["abs_diff"] = abs(analytic - oracle)
    return record


def twirl_record(psi: PureQubit, n: int, oracle: bool = False, max_qubits: int = 10) -> RecordDict:
    record = new_record("twirl", psi)
    t = twirl_pure_analytic(psi, n)
    record.update({"n": n, "w_even": t.w_even, "w_odd": t.w_odd})
    if oracle:
        dense = twirl_dense(ncopy_dense(psi, n, max_qubits))
        record["abs_diff"] = trace_distance(reconstruct_dense(t, max_qubits), dense)
    return record


def critical_record(h0: Hypothesis, h1: Hypothesis, eps: float, tol: float, max_iterations: int) -> RecordDict:
    report = critical_n_exact(h0, h1, eps, tol, max_iterations)
    record = new_record("critical-n", h0, h1)
    record.update({
        "eps": eps,
        "case_tag": _case_tag(h0, h1, tol),
        "n_eps": report.n_exact,
        "n_formula": report.n_formula,
        "lower_bound": report.lower_bound,
        "upper_bound": report.upper_bound,
    })
    return record


def chernoff_record(h0: Hypothesis, h1: Hypothesis, tol: float) -> RecordDict:
    record = new_record("chernoff", h0, h1)
    rho0, rho1 = h0.density(), h1.density()
    record.update({
        "case_tag": _case_tag(h0, h1, tol),
        "chernoff": chernoff_exponent(rho0, rho1),
        "qre": qre(rho0, rho1),
    })
    return record


def random_pairs(count: int, seed: int) -> list[tuple[PureQubit, PureQubit]]:
    if count < 1:
        raise ValidationError(f"random pair count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        p, q = rng.uniform(0.0, 1.0, size=2)
        phi = rng.uniform(0.0, 2 * math.pi)
        pairs.append((PureQubit(float(p)), PureQubit(float(q), float(phi))))
    return pairs


# --- engine ---


def run_sweep(plan: SweepPlan) -> Iterator[SweepStarted | PointComputed | SweepComplete]:
    """Evaluate every grid point, yielding records sorted by (n, eps, pair). No print, no persistence."""
    yield SweepStarted(plan.command, plan.points, plan.jobs)

    n_eps = {
        (i, eps): _n_eps(h0, h1, eps, plan)
        for i, (h0, h1) in enumerate(plan.pairs)
        for eps in plan.epss
    }
    tasks = [
        (n, eps, i)
        for i in range(len(plan.pairs))
        for n in plan.ns
        for eps in plan.epss
    ]

    def work(task):
        n, eps, i = task
        h0, h1 = plan.pairs[i]
        return task, evaluate_point(h0, h1, n, eps, plan, n_eps[(i, eps)])

    if plan.jobs > 1:
        with ThreadPoolExecutor(max_workers=plan.jobs) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(task) for task in tasks]

    results.sort(key=lambda item: item[0])
    for _, record in results:
        yield PointComputed(record)
    yield SweepComplete(len(results))
