import math

import numpy as np
import pytest

from parityqht.linalg import ValidationError
from parityqht.states import (
    DenseState,
    MaxMixed,
    PureQubit,
    branch_dense,
    branch_inner,
    dicke_vector,
    even_odd_dims,
    hamming_weights,
    ncopy_dense,
    parity_operator,
    parity_weights,
    reconstruct_dense,
    trace_distance,
    twirl_dense,
    twirl_maxmixed,
    twirl_pure_analytic,
)


# --- qubit states ---

def test_pure_qubit_rejects_out_of_range_p():
    with pytest.raises(ValidationError):
        PureQubit(1.5)
    with pytest.raises(ValidationError):
        PureQubit(-0.1)


def test_pure_qubit_rejects_infinite_phase():
    with pytest.raises(ValidationError):
        PureQubit(0.5, math.inf)


def test_pure_qubit_wraps_phase():
    psi = PureQubit(0.3, 2 * math.pi + 0.25)
    assert abs(psi.phi - 0.25) < 1e-12
    assert abs(PureQubit(0.3, -math.pi / 2).phi - 3 * math.pi / 2) < 1e-12


def test_pure_qubit_snaps_to_basis_and_drops_phase():
    psi = PureQubit(1e-13, 1.0)
    assert psi.p == 0.0
    assert psi.phi == 0.0
    assert psi.basis_bit == 1
    assert psi.kind() == "basis1"
    assert PureQubit.basis(0).kind() == "basis0"
    assert PureQubit(0.4).kind() == "pure"


def test_pure_qubit_density_is_rank_one():
    rho = PureQubit(0.3, 0.7).density()
    assert abs(np.trace(rho) - 1) < 1e-15
    assert np.allclose(rho @ rho, rho)


def test_maxmixed_density():
    assert np.allclose(MaxMixed().density(), np.eye(2) / 2)
    assert MaxMixed().kind() == "maxmixed"


# --- combinatorics ---

def test_even_odd_dims():
    assert even_odd_dims(1) == (1, 1)
    assert even_odd_dims(4) == (8, 8)


def test_parity_weights_values():
    assert parity_weights(0.75, 4) == pytest.approx((0.53125, 0.46875), abs=1e-15)
    assert parity_weights(0.25, 3) == pytest.approx((0.4375, 0.5625), abs=1e-15)
    assert parity_weights(0.5, 7) == (0.5, 0.5)


def test_parity_weights_basis_states():
    assert parity_weights(1.0, 5) == (1.0, 0.0)
    assert parity_weights(0.0, 3) == (0.0, 1.0)
    assert parity_weights(0.0, 4) == (1.0, 0.0)


def test_parity_weights_near_basis_are_accurate():
    w_even, w_odd = parity_weights(1 - 1e-9, 10)
    # 1 - (1 - 2e-9)^10 ~ 2e-8
    assert abs(w_odd - 1e-8) < 1e-14
    assert abs(w_even + w_odd - 1) < 1e-14


def test_hamming_weights():
    assert list(hamming_weights(2)) == [0, 1, 1, 2]


def test_dicke_vector_normalized():
    v = dicke_vector(4, 2)
    assert abs(np.linalg.norm(v) - 1) < 1e-15
    assert np.count_nonzero(v) == 6


def test_dicke_vector_rejects_bad_index():
    with pytest.raises(ValidationError):
        dicke_vector(3, 4)


# --- twirling ---

def test_twirl_analytic_matches_dense_small_n():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        psi = PureQubit(float(rng.uniform()), float(rng.uniform(0, 2 * math.pi)))
        for n in range(1, 7):
            analytic = reconstruct_dense(twirl_pure_analytic(psi, n))
            dense = twirl_dense(ncopy_dense(psi, n))
            assert trace_distance(analytic, dense) <= 1e-10


def test_twirl_analytic_matches_dense_large_n():
    rng = np.random.default_rng(99)
    for _ in range(200):
        psi = PureQubit(float(rng.uniform()), float(rng.uniform(0, 2 * math.pi)))
        for n in range(7, 11):
            analytic = reconstruct_dense(twirl_pure_analytic(psi, n))
            dense = twirl_dense(ncopy_dense(psi, n))
            assert trace_distance(analytic, dense) <= 1e-10


def test_twirl_branches_are_unit_vectors():
    t = twirl_pure_analytic(PureQubit(0.2, 1.1), 9)
    for parity in (0, 1):
        assert abs(branch_inner(t.branch(parity), t.branch(parity)) - 1) < 1e-12
    assert abs(branch_inner(t.v_even, t.v_odd)) == 0.0
    assert abs(t.w_even + t.w_odd - 1) < 1e-15


def test_twirl_large_n_stays_finite():
    t = twirl_pure_analytic(PureQubit(0.3, 0.5), 2000)
    assert abs(t.w_even - 0.5) < 1e-12
    norm = sum(abs(a) ** 2 for _, a in t.v_odd)
    assert abs(norm - 1) < 1e-9


def test_twirl_basis_state_has_single_branch():
    t = twirl_pure_analytic(PureQubit.basis(1), 3)
    assert (t.w_even, t.w_odd) == (0.0, 1.0)
    assert t.v_even == ()
    assert t.v_odd == ((3, 1.0 + 0j),)


def test_twirl_dense_is_idempotent_and_commutes_with_parity():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = x @ x.conj().T
    state = DenseState.from_matrix(rho / np.trace(rho))
    once = twirl_dense(state)
    twice = twirl_dense(once)
    omega = parity_operator(3)
    assert np.max(np.abs(once.rho - twice.rho)) <= 1e-12
    assert np.max(np.abs(omega @ once.rho - once.rho @ omega)) <= 1e-12
    assert np.allclose(once.rho, (state.rho + omega @ state.rho @ omega) / 2, atol=1e-12)


def test_twirl_maxmixed_is_identity_over_dim():
    s = twirl_maxmixed(3)
    assert np.allclose(s.rho, np.eye(8) / 8)
    assert np.allclose(ncopy_dense(MaxMixed(), 3).rho, s.rho)


def test_branch_dense_matches_dicke_expansion():
    t = twirl_pure_analytic(PureQubit(0.6, 0.4), 4)
    v = branch_dense(t.v_even, 4)
    expected = sum(a * dicke_vector(4, j) for j, a in t.v_even)
    assert np.allclose(v, expected)


# --- dense states ---

def test_dense_state_rejects_bad_trace():
    with pytest.raises(ValidationError, match="trace"):
        DenseState.from_matrix(np.eye(2))


def test_dense_state_rejects_non_power_of_two():
    with pytest.raises(ValidationError, match="2\\^n"):
        DenseState.from_matrix(np.eye(3) / 3)


def test_trace_distance_of_orthogonal_states():
    assert abs(trace_distance(PureQubit.basis(0).density(), PureQubit.basis(1).density()) - 1) < 1e-15
