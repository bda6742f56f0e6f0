import math

import pytest

from parityqht.linalg import NumericalError, ResourceLimitError, ValidationError
from parityqht.parity import critical_n_exact
from parityqht.states import MaxMixed, PureQubit
from parityqht.sweep import (
    PointComputed,
    SweepComplete,
    SweepStarted,
    chernoff_record,
    critical_record,
    grid_plan,
    random_pairs,
    run_sweep,
    twirl_record,
)


def _records(plan):
    """Helper: run a plan and keep only the records."""
    return [event.record for event in run_sweep(plan) if isinstance(event, PointComputed)]


# --- planning ---

def test_grid_plan_sorts_and_dedupes():
    plan = grid_plan("beta", [(PureQubit(0.3), PureQubit(0.6))], [3, 1, 3], [0.5, 0.1])
    assert plan.ns == (1, 3)
    assert plan.epss == (0.1, 0.5)
    assert plan.points == 4


def test_grid_plan_rejects_bad_input():
    pair = [(PureQubit(0.3), PureQubit(0.6))]
    with pytest.raises(ValidationError):
        grid_plan("beta", pair, [0], [0.1])
    with pytest.raises(ValidationError):
        grid_plan("beta", pair, [1], [1.0])
    with pytest.raises(ValidationError):
        grid_plan("beta", [], [1], [0.1])
    with pytest.raises(ValidationError, match="unknown grid command"):
        grid_plan("plot", pair, [1], [0.1])


def test_grid_plan_enforces_point_limit():
    with pytest.raises(ResourceLimitError, match="limit"):
        grid_plan("beta", [(PureQubit(0.3), PureQubit(0.6))], list(range(1, 11)), [0.1, 0.2], max_points=19)


def test_grid_plan_enforces_dense_cap_for_oracle():
    with pytest.raises(ResourceLimitError, match="dense cap"):
        grid_plan("beta", [(PureQubit(0.3), PureQubit(0.6))], [12], [0.1], oracle=True, max_qubits=10)


def test_grid_plan_theorem1_needs_pure_states():
    with pytest.raises(ValidationError, match="pure"):
        grid_plan("theorem1", [(PureQubit(0.3), MaxMixed())], [1], [0.1])


# --- engine ---

def test_run_sweep_event_order():
    plan = grid_plan("beta", [(PureQubit(0.3), PureQubit(0.6))], [1, 2], [0.1])
    events = list(run_sweep(plan))
    assert isinstance(events[0], SweepStarted)
    assert events[0].points == 2
    assert all(isinstance(e, PointComputed) for e in events[1:-1])
    assert isinstance(events[-1], SweepComplete)
    assert events[-1].total_points == 2


def test_run_sweep_rows_sorted_by_n_then_eps():
    plan = grid_plan("sweep", [(PureQubit(0.3), PureQubit(0.7, 0.9))], [3, 1, 2], [0.5, 0.1])
    rows = [(r["n"], r["eps"]) for r in _records(plan)]
    assert rows == sorted(rows)
    assert len(rows) == 6


def test_run_sweep_threads_do_not_change_output():
    pairs = random_pairs(3, seed=4)
    serial = _records(grid_plan("sweep", pairs, [1, 2, 3], [0.1, 0.5]))
    threaded = _records(grid_plan("sweep", pairs, [1, 2, 3], [0.1, 0.5], jobs=4))
    assert serial == threaded


def test_identical_twirl_sweep_is_flat():
    plan = grid_plan("sweep", [(PureQubit(0.3), PureQubit(0.3, math.pi))], list(range(1, 9)), [0.2])
    records = _records(plan)
    assert all(abs(r["beta"] - 0.8) < 1e-12 for r in records)
    assert all(r["case_tag"] == "IdenticalTwirl" for r in records)
    assert all(r["n_eps"] is None for r in records)


def test_generic_sweep_hits_zero_at_critical_n():
    psi0, psi1 = PureQubit(0.3), PureQubit(0.7, math.pi / 2)
    n_exact = critical_n_exact(psi0, psi1, 0.1).n_exact
    records = _records(grid_plan("sweep", [(psi0, psi1)], list(range(1, n_exact + 4)), [0.1]))
    for r in records:
        assert r["n_eps"] == n_exact
        assert (r["beta"] == 0.0) == (r["n"] >= n_exact)
        if r["beta"] == 0.0:
            assert r["dhe"].infinite


def test_oracle_columns_agree():
    pairs = [(PureQubit(0.3), PureQubit(0.7, 0.9)), (PureQubit.basis(0), PureQubit(0.4)), (MaxMixed(), PureQubit(0.6))]
    records = _records(grid_plan("beta", pairs, [1, 2, 3, 4, 5], [0.1, 0.5], oracle=True))
    for r in records:
        assert r["oracle_beta"] is not None
        assert r["abs_diff"] <= 1e-8


def test_theorem3_sweep_approaches_one():
    records = _records(grid_plan("theorem3", [(PureQubit(0.75), MaxMixed())], list(range(1, 11)), [0.1]))
    rates = [float(r["dhe_over_n"]) for r in records]
    assert rates == sorted(rates)
    assert abs(rates[-1] - 0.915) <= 0.005
    assert all(r["abs_diff"] <= 1e-9 for r in records)
    assert records[3]["beta"] == pytest.approx(0.1116667, abs=1e-7)


def test_theorem3_sweep_maxmixed_null_reports_critical_n():
    records = _records(grid_plan("theorem3", [(MaxMixed(), PureQubit(0.75))], [1, 5], [0.1]))
    assert [r["n_eps"] for r in records] == [5, 5]
    assert records[1]["beta"] == 0.0
    assert records[0]["beta"] > 0.0


# --- single records ---

def test_twirl_record_with_oracle():
    record = twirl_record(PureQubit(0.75, 0.3), 4, oracle=True)
    assert record["w_even"] == pytest.approx(0.53125, abs=1e-15)
    assert record["abs_diff"] <= 1e-10


def test_critical_record_example():
    record = critical_record(PureQubit(0.5), PureQubit.basis(0), 0.01, 1e-12, 1_000_000)
    assert record["n_eps"] == 7
    assert record["n_formula"] == 7
    assert record["case_tag"] == "DegenerateAlt"


def test_chernoff_record():
    record = chernoff_record(PureQubit.basis(0), PureQubit(0.5), 1e-12)
    assert abs(float(record["chernoff"]) - 1.0) < 1e-12
    assert record["qre"].infinite


def test_random_pairs_are_reproducible():
    assert random_pairs(5, seed=1) == random_pairs(5, seed=1)
    assert random_pairs(5, seed=1) != random_pairs(5, seed=2)
    with pytest.raises(ValidationError):
        random_pairs(0, seed=1)


def test_search_settings_reach_beta_min():
    pair = [(PureQubit(0.3), PureQubit(0.6))]
    plan = grid_plan("beta", pair, [3], [0.1], max_search_iterations=1, duality_tol=1e-6)
    assert plan.max_search_iterations == 1
    assert plan.duality_tol == 1e-6
    with pytest.raises(NumericalError, match="did not converge"):
        _records(plan)
