"""Dense complex linear algebra on small matrices.

Everything here works on plain ``numpy`` arrays. Matrices are validated on
entry (square, Hermitian within ``HERMITIAN_TOL``) and never mutated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import scipy.linalg

from parityqht.config import EIG_RESIDUAL_TOL, HERMITIAN_TOL, dense_cap

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complexfloating]


class ValidationError(ValueError):
    """Raised when an input matrix, state or parameter is out of range. Caller decides how to display."""


class ResourceLimitError(Exception):
    """Raised when a dense object or a grid would exceed its configured cap. Caller decides how to display."""


class NumericalError(Exception):
    """Raised when a numerical procedure fails to meet its accuracy target.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (bracket, iteration count, offending vector). Caller decides how to display.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


@dataclass(frozen=True)
class Spectrum:
    """Ascending real eigenvalues with orthonormal eigenvector columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def as_square(matrix: npt.ArrayLike, name: str = "matrix") -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def hermitian_deviation(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(matrix: npt.ArrayLike, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    """Return ``matrix`` as a complex array, symmetrized, or raise ValidationError.

    The tolerance is absolute for matrices of unit scale and grows with the
    largest entry above that.
    """
    m = as_square(matrix, name)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    dev = hermitian_deviation(m)
    if dev > tol * scale:
        raise ValidationError(f"{name} is not Hermitian (max deviation {dev:.3e})")
    return (m + m.conj().T) / 2


def is_diagonal(m: np.ndarray, tol: float = 0.0) -> bool:
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def hermitian_eig(matrix: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> Spectrum:
    h = check_hermitian(matrix, tol)
    if h.shape[0] == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0), dtype=complex))
    if is_diagonal(h):
        d = np.real(np.diag(h))
        order = np.argsort(d, kind="stable")
        vecs = np.eye(len(d), dtype=complex)[:, order]
        return Spectrum(d[order], vecs)
    w, v = scipy.linalg.eigh(h)
    norm = max(float(np.max(np.abs(w))), 1.0)
    residual = float(np.max(np.linalg.norm(h @ v - v * w, axis=0)))
    if residual > EIG_RESIDUAL_TOL * norm:
        raise NumericalError(
            f"eigen-decomposition residual {residual:.3e} above tolerance",
            {"residual": residual, "dimension": h.shape[0]},
        )
    return Spectrum(w, v)


def eigvalsh(matrix: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Eigenvalues only, ascending. Skips the eigenvector residual check."""
    h = check_hermitian(matrix, tol)
    if is_diagonal(h):
        return np.sort(np.real(np.diag(h)))
    return scipy.linalg.eigvalsh(h)


def trace_norm(matrix: npt.ArrayLike) -> float:
    return float(np.sum(np.abs(eigvalsh(matrix))))


def positive_part_trace(matrix: npt.ArrayLike) -> float:
    w = eigvalsh(matrix)
    return float(np.sum(w[w > 0]))


def check_dimension(dim: int, max_qubits: int | None = None, what: str = "dense matrix") -> None:
    cap = dense_cap() if max_qubits is None else max_qubits
    if dim > 2 ** cap:
        raise ResourceLimitError(
            f"{what} of dimension {dim} exceeds the dense cap 2^{cap}"
        )


def kron(a: npt.ArrayLike, b: npt.ArrayLike, max_qubits: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise ValidationError("kron expects two matrices")
    check_dimension(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), max_qubits, "Kronecker product")
    return np.kron(a, b)


def kron_power(a: npt.ArrayLike, n: int, max_qubits: int | None = None) -> np.ndarray:
    if n < 1:
        raise ValidationError(f"kron_power needs n >= 1, got {n}")
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValidationError("kron_power expects a matrix")
    check_dimension(max(a.shape) ** n, max_qubits, f"{n}-fold tensor power")
    result = a
    for _ in range(n - 1):
        result = np.kron(result, a)
    return result
