import numpy as np
import pytest

from parityqht.linalg import (
    NumericalError,
    ResourceLimitError,
    ValidationError,
    as_square,
    check_dimension,
    check_hermitian,
    eigvalsh,
    hermitian_eig,
    is_diagonal,
    kron,
    kron_power,
    positive_part_trace,
    trace_norm,
)


# --- validation ---

def test_as_square_rejects_non_square():
    with pytest.raises(ValidationError, match="square"):
        as_square(np.zeros((2, 3)))


def test_as_square_rejects_nan():
    with pytest.raises(ValidationError, match="non-finite"):
        as_square(np.array([[1.0, np.nan], [np.nan, 0.0]]))


def test_check_hermitian_rejects_asymmetric():
    with pytest.raises(ValidationError, match="not Hermitian"):
        check_hermitian(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_check_hermitian_symmetrizes_within_tolerance():
    m = np.array([[1.0, 0.5 + 1e-14], [0.5, 0.0]])
    h = check_hermitian(m)
    assert np.array_equal(h, h.conj().T)
    assert abs(h[0, 1] - 0.5) < 1e-13


def test_check_hermitian_tolerance_scales_with_entries():
    m = np.array([[1e6, 1.0], [1.0 + 1e-7, 0.0]])
    check_hermitian(m)


def test_is_diagonal():
    assert is_diagonal(np.diag([1.0, 2.0]))
    assert not is_diagonal(np.array([[1.0, 1e-3], [1e-3, 1.0]]))
    assert is_diagonal(np.array([[1.0, 1e-3], [1e-3, 1.0]]), tol=1e-2)


# --- spectra ---

def test_hermitian_eig_diagonal_shortcut_sorts():
    decomp = hermitian_eig(np.diag([3.0, -1.0, 2.0]))
    assert list(decomp.eigenvalues) == [-1.0, 2.0, 3.0]
    assert abs(decomp.eigenvectors[1, 0]) == 1.0


def test_hermitian_eig_reconstructs_matrix():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = x + x.conj().T
    decomp = hermitian_eig(h)
    back = decomp.eigenvectors @ np.diag(decomp.eigenvalues) @ decomp.eigenvectors.conj().T
    assert np.max(np.abs(back - h)) < 1e-10
    assert len(decomp) == 5


def test_eigvalsh_ascending():
    w = eigvalsh(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(w, [-1.0, 1.0])


def test_trace_norm_and_positive_part():
    m = np.diag([1.0, -2.0, 0.5])
    assert abs(trace_norm(m) - 3.5) < 1e-15
    assert abs(positive_part_trace(m) - 1.5) < 1e-15


def test_numerical_error_carries_diagnostics():
    e = NumericalError("failed", {"bracket": [0, 1]})
    assert e.diagnostics == {"bracket": [0, 1]}
    assert str(e) == "failed"


# --- tensor products ---

def test_kron_power_shape():
    assert kron_power(np.eye(2), 3).shape == (8, 8)


def test_kron_power_matches_repeated_kron():
    a = np.array([[0.6, 0.1j], [-0.1j, 0.4]])
    assert np.allclose(kron_power(a, 2), kron(a, a))


def test_kron_power_rejects_zero_copies():
    with pytest.raises(ValidationError):
        kron_power(np.eye(2), 0)


def test_check_dimension_respects_cap():
    check_dimension(8, max_qubits=3)
    with pytest.raises(ResourceLimitError, match="dense cap"):
        check_dimension(16, max_qubits=3)


def test_check_dimension_reads_environment(monkeypatch):
    monkeypatch.setenv("PARITYQHT_DENSE_CAP", "2")
    with pytest.raises(ResourceLimitError):
        kron_power(np.eye(2), 3)
