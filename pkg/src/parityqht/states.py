"""Qubit states, n-copy tensor powers, the parity operator and Z2-twirling.

Two representations of a twirled n-copy pure state live here:

- ``TwirledState``: parity weights plus the even and odd branch vectors,
  stored sparsely over the Dicke index j. Works for any n.
- ``DenseState``: an explicit 2^n density matrix, capped by the dense cap.
  Used as the brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.special import gammaln

from parityqht.linalg import (
    ValidationError,
    check_dimension,
    check_hermitian,
    eigvalsh,
    trace_norm,
)

BASIS_TOL = 1e-12
TWO_PI = 2 * math.pi

Branch = tuple[tuple[int, complex], ...]


@dataclass(frozen=True)
class PureQubit:
    """sqrt(p)|0> + e^{i phi} sqrt(1-p)|1>."""

    p: float
    phi: float = 0.0

    def __post_init__(self):
        p = float(self.p)
        phi = float(self.phi)
        if not math.isfinite(p) or p < -BASIS_TOL or p > 1 + BASIS_TOL:
            raise ValidationError(f"p must lie in [0, 1], got {self.p}")
        if not math.isfinite(phi):
            raise ValidationError(f"phi must be finite, got {self.phi}")
        if p <= BASIS_TOL:
            p = 0.0
        elif p >= 1 - BASIS_TOL:
            p = 1.0
        phi = math.fmod(phi, TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        if p in (0.0, 1.0):
            phi = 0.0
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def basis(cls, bit: int) -> PureQubit:
        if bit not in (0, 1):
            raise ValidationError(f"basis bit must be 0 or 1, got {bit}")
        return cls(1.0 if bit == 0 else 0.0)

    @property
    def delta(self) -> float:
        return 2 * self.p - 1

    @property
    def basis_bit(self) -> int | None:
        """0 or 1 for |0> and |1>, None otherwise."""
        if self.p == 1.0:
            return 0
        if self.p == 0.0:
            return 1
        return None

    def amplitudes(self) -> np.ndarray:
        return np.array(
            [math.sqrt(self.p), np.exp(1j * self.phi) * math.sqrt(1 - self.p)],
            dtype=complex,
        )

    def density(self) -> np.ndarray:
        v = self.amplitudes()
        return np.outer(v, v.conj())

    def kind(self) -> str:
        bit = self.basis_bit
        return "pure" if bit is None else f"basis{bit}"


@dataclass(frozen=True)
class MaxMixed:
    """The maximally mixed qubit state I/2."""

    def density(self) -> np.ndarray:
        return np.eye(2, dtype=complex) / 2

    def kind(self) -> str:
        return "maxmixed"


Hypothesis = PureQubit | MaxMixed


@dataclass(frozen=True)
class TwirledState:
    """Z2-twirl of |psi>^{(x)n}: w_even |0_p><0_p| + w_odd |1_p><1_p|.

    Branch vectors are (j, amplitude) pairs over the Dicke basis. An empty
    branch carries weight 0.
    """

    n: int
    delta: float
    w_even: float
    w_odd: float
    v_even: Branch = field(repr=False)
    v_odd: Branch = field(repr=False)

    def branch(self, parity: int) -> Branch:
        return self.v_even if parity == 0 else self.v_odd

    def weight(self, parity: int) -> float:
        return self.w_even if parity == 0 else self.w_odd


@dataclass(frozen=True)
class DenseState:
    n: int
    rho: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, rho: npt.ArrayLike, validate: bool = True) -> DenseState:
        """Wrap a 2^n density matrix, checking trace and positivity if asked."""
        m = check_hermitian(rho, name="rho")
        dim = m.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or 2 ** n != dim:
            raise ValidationError(f"density matrix dimension must be 2^n, got {dim}")
        if validate:
            tr = float(np.real(np.trace(m)))
            if abs(tr - 1) > 1e-10:
                raise ValidationError(f"density matrix trace is {tr}, expected 1")
            low = float(eigvalsh(m)[0])
            if low < -1e-10:
                raise ValidationError(f"density matrix has negative eigenvalue {low:.3e}")
        return cls(n, m)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


# --- combinatorics ---


def even_odd_dims(n: int) -> tuple[int, int]:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    even = sum(math.comb(n, j) for j in range(0, n + 1, 2))
    odd = sum(math.comb(n, j) for j in range(1, n + 1, 2))
    return even, odd


def log_abs_delta_power(p: float, n: int) -> float:
    """log |2p-1|^n, accurate near p = 0 and p = 1."""
    if p == 0.5:
        return -math.inf
    if p > 0.5:
        return n * math.log1p(-2 * (1 - p))
    return n * math.log1p(-2 * p)


def parity_weights(p: float, n: int) -> tuple[float, float]:
    """((1 + (2p-1)^n)/2, (1 - (2p-1)^n)/2) without cancellation."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    log_t = log_abs_delta_power(p, n)
    if log_t == -math.inf:
        return 0.5, 0.5
    t = math.exp(log_t)
    one_minus_t = -math.expm1(log_t)
    negative = p < 0.5 and n % 2 == 1
    if negative:
        return one_minus_t / 2, (1 + t) / 2
    return (1 + t) / 2, one_minus_t / 2


def hamming_weights(n: int) -> np.ndarray:
    w = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        w = np.concatenate([w, w + 1])
    return w


# --- dense constructions ---


def dicke_vector(n: int, j: int, max_qubits: int | None = None) -> np.ndarray:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if j < 0 or j > n:
        raise ValidationError(f"Dicke index j must lie in [0, {n}], got {j}")
    check_dimension(2 ** n, max_qubits, "Dicke vector")
    mask = hamming_weights(n) == j
    v = np.zeros(2 ** n, dtype=complex)
    v[mask] = 1 / math.sqrt(math.comb(n, j))
    return v


def parity_operator(n: int, max_qubits: int | None = None) -> np.ndarray:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    check_dimension(2 ** n, max_qubits, "parity operator")
    signs = 1 - 2 * (hamming_weights(n) % 2)
    return np.diag(signs.astype(complex))


def ncopy_vector(psi: PureQubit, n: int, max_qubits: int | None = None) -> np.ndarray:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    check_dimension(2 ** n, max_qubits, f"{n}-copy state")
    amp = psi.amplitudes()
    v = amp
    for _ in range(n - 1):
        v = np.kron(v, amp)
    return v


def ncopy_dense(h: Hypothesis, n: int, max_qubits: int | None = None) -> DenseState:
    if isinstance(h, MaxMixed):
        return twirl_maxmixed(n, max_qubits)
    v = ncopy_vector(h, n, max_qubits)
    return DenseState(n, np.outer(v, v.conj()))


def twirl_dense(state: DenseState) -> DenseState:
    """(rho + omega rho omega) / 2, i.e. drop every entry that links the two parity sectors."""
    parity = hamming_weights(state.n) % 2
    same = parity[:, None] == parity[None, :]
    return DenseState(state.n, np.where(same, state.rho, 0))


def twirl_maxmixed(n: int, max_qubits: int | None = None) -> DenseState:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    check_dimension(2 ** n, max_qubits, "maximally mixed state")
    dim = 2 ** n
    return DenseState(n, np.eye(dim, dtype=complex) / dim)


# --- analytic twirl ---


def _branch(psi: PureQubit, n: int, parity: int, weight: float) -> Branch:
    if weight == 0.0:
        return ()
    bit = psi.basis_bit
    if bit is not None:
        j = 0 if bit == 0 else n
        return ((j, 1.0 + 0j),) if j % 2 == parity else ()
    js = np.arange(parity, n + 1, 2)
    log_amp = 0.5 * (
        gammaln(n + 1) - gammaln(js + 1) - gammaln(n - js + 1)
        + (n - js) * math.log(psi.p) + js * math.log1p(-psi.p)
        - math.log(weight)
    )
    amps = np.exp(log_amp) * np.exp(1j * js * psi.phi)
    return tuple((int(j), complex(a)) for j, a in zip(js, amps))


def twirl_pure_analytic(psi: PureQubit, n: int) -> TwirledState:
    w_even, w_odd = parity_weights(psi.p, n)
    return TwirledState(
        n=n,
        delta=psi.delta,
        w_even=w_even,
        w_odd=w_odd,
        v_even=_branch(psi, n, 0, w_even),
        v_odd=_branch(psi, n, 1, w_odd),
    )


def branch_inner(u: Branch, v: Branch) -> complex:
    """<u|v> for two sparse Dicke-basis vectors."""
    lookup = dict(u)
    return complex(sum(np.conj(lookup[j]) * a for j, a in v if j in lookup))


def branch_dense(v: Branch, n: int, max_qubits: int | None = None) -> np.ndarray:
    check_dimension(2 ** n, max_qubits, "branch vector")
    coeff = np.zeros(n + 1, dtype=complex)
    for j, a in v:
        coeff[j] = a / math.sqrt(math.comb(n, j))
    return coeff[hamming_weights(n)]


def reconstruct_dense(t: TwirledState, max_qubits: int | None = None) -> DenseState:
    dim = 2 ** t.n
    rho = np.zeros((dim, dim), dtype=complex)
    for parity in (0, 1):
        w = t.weight(parity)
        if w > 0:
            v = branch_dense(t.branch(parity), t.n, max_qubits)
            rho += w * np.outer(v, v.conj())
    return DenseState(t.n, rho)


def trace_distance(a: DenseState | npt.ArrayLike, b: DenseState | npt.ArrayLike) -> float:
    ma = a.rho if isinstance(a, DenseState) else np.asarray(a, dtype=complex)
    mb = b.rho if isinstance(b, DenseState) else np.asarray(b, dtype=complex)
    if ma.shape != mb.shape:
        raise ValidationError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return 0.5 * trace_norm(ma - mb)
