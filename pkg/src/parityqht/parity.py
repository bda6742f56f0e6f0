"""Hypothesis testing restricted to parity-invariant measurements.

The Z2-twirled n-copy states of two pure qubits live in the span of at most
four vectors: the even and odd branches of each state. Everything here works
in a Gram-Schmidt ("logical") basis of that span, so cost does not grow with
n. Dense 2^n constructions are kept for cross-checking only.

Conventions: the null hypothesis is psi0 = (p, phi0), the alternative is
psi1 = (q, phi1), and only the relative phase phi = phi1 - phi0 enters.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from parityqht.linalg import NumericalError, ValidationError, check_dimension
from parityqht.optimize import MAX_ITERATIONS
from parityqht.states import (
    Hypothesis,
    MaxMixed,
    PureQubit,
    TWO_PI,
    branch_dense,
    ncopy_dense,
    log_abs_delta_power,
    ncopy_vector,
    parity_weights,
    twirl_dense,
    twirl_pure_analytic,
)
from parityqht.testing import DUALITY_TOL, BetaResult, BinaryTest, Complement, beta_min, validate_eps

logger = logging.getLogger(__name__)

CLASSIFY_TOL = 1e-12
COLLAPSE_TOL = 1e-12  # squared norm below which a Gram-Schmidt vector is treated as absent
GRAM_SCHMIDT_TOL = 1e-12
CRITICAL_SLACK = 1e-9
MAX_CRITICAL_ITERATIONS = 1_000_000
_CHUNK = 4096


class UnsupportedCaseError(ValueError):
    """Raised when an operation is undefined for the given pair of states. Caller decides how to display."""


class NonTerminationError(NumericalError):
    """Raised when the critical-copy search runs past its iteration cap.

    ``trace`` holds the residuals computed so far. Caller decides how to display.
    """

    def __init__(self, message: str, trace: np.ndarray, diagnostics: dict | None = None):
        super().__init__(message, diagnostics)
        self.trace = trace


class CaseTag(enum.Enum):
    IDENTICAL_TWIRL = "IdenticalTwirl"
    BASIS_ORTHOGONAL = "BasisOrthogonal"
    GENERIC_DISTINCT = "GenericDistinct"
    DEGENERATE_NULL = "DegenerateNull"
    DEGENERATE_ALT = "DegenerateAlt"


@dataclass(frozen=True)
class CaseClass:
    tag: CaseTag
    p: float
    q: float
    phi: float


@dataclass(frozen=True)
class OverlapData:
    """Moduli and phases of <0_q|0_p> and <1_q|1_p>, with the base quantities they derive from."""

    a_n: float
    theta_a: float
    b_n: float
    theta_b: float
    mu1: float
    mu2: float
    lambda1: float
    lambda2: float
    lambda_max: float
    lambda_min: float

    @property
    def even_overlap(self) -> complex:
        return self.a_n * complex(math.cos(self.theta_a), math.sin(self.theta_a))

    @property
    def odd_overlap(self) -> complex:
        return self.b_n * complex(math.cos(self.theta_b), math.sin(self.theta_b))


@dataclass(frozen=True)
class LogicalPair:
    """Twirled states as small matrices over an orthonormal basis of their joint span.

    ``povm`` lists the basis indices whose projectors make up the fixed
    zero-type-II test; ``complement`` covers the rest of the 2^n space when a
    maximally mixed state is involved.
    """

    sigma0: np.ndarray
    sigma1: np.ndarray
    labels: tuple[str, ...]
    povm: tuple[int, ...]
    complement: Complement | None = None
    case: CaseTag | None = None


@dataclass(frozen=True)
class FormulaReport:
    n_formula: int | None
    lower_bound: float
    upper_bound: float
    lambda_max: float | None = None
    asymptotic: float | None = None
    descriptor: str = ""


@dataclass(frozen=True)
class CriticalCopiesReport:
    n_exact: int
    n_formula: int | None
    lower_bound: float
    upper_bound: float
    residuals: np.ndarray = field(repr=False)
    lambda_max: float | None = None
    asymptotic: float | None = None
    descriptor: str = ""

    @property
    def trace(self) -> np.ndarray:
        """Residual Tr(sigma0 (I - E_n)) for n = 1, 2, ... up to the end of the scan."""
        return self.residuals


@dataclass(frozen=True)
class ClosedForm:
    value: float
    in_range: bool
    branch: str


# --- classification ---


def relative_phase(psi0: PureQubit, psi1: PureQubit) -> float:
    phi = math.fmod(psi1.phi - psi0.phi, TWO_PI)
    return phi + TWO_PI if phi < 0 else phi


def _phase_distance(phi: float, target: float) -> float:
    d = abs(math.fmod(phi - target, TWO_PI))
    return min(d, TWO_PI - d)


def classify(psi0: PureQubit, psi1: PureQubit, tol: float = CLASSIFY_TOL) -> CaseClass:
    phi = relative_phase(psi0, psi1)
    bit0, bit1 = psi0.basis_bit, psi1.basis_bit
    if bit0 is not None and bit1 is not None:
        tag = CaseTag.IDENTICAL_TWIRL if bit0 == bit1 else CaseTag.BASIS_ORTHOGONAL
    elif bit0 is not None:
        tag = CaseTag.DEGENERATE_NULL
    elif bit1 is not None:
        tag = CaseTag.DEGENERATE_ALT
    elif abs(psi0.p - psi1.p) <= tol and (
        _phase_distance(phi, 0.0) <= tol or _phase_distance(phi, math.pi) <= tol
    ):
        tag = CaseTag.IDENTICAL_TWIRL
    else:
        tag = CaseTag.GENERIC_DISTINCT
    return CaseClass(tag, psi0.p, psi1.p, phi)


# --- overlaps ---


def _check_n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    return int(n)


def _z_pair(p: float, q: float, phi: float) -> tuple[float, float, complex, complex]:
    mu1 = math.sqrt(p * q)
    mu2 = math.sqrt((1 - p) * (1 - q))
    rot = complex(math.cos(phi), -math.sin(phi)) * mu2
    return mu1, mu2, mu1 + rot, mu1 - rot


def overlaps(p: float, q: float, phi: float, n: int) -> OverlapData:
    n = _check_n(n)
    for name, x in (("p", p), ("q", q)):
        if not 0 < x < 1:
            raise ValidationError(f"overlaps need {name} in (0, 1), got {x}; use the degenerate-case path")
    mu1, mu2, z1, z2 = _z_pair(p, q, phi)
    l1, l2 = abs(z1), abs(z2)
    lmax, lmin = max(l1, l2), min(l1, l2)
    u1 = (z1 / lmax) ** n
    u2 = (z2 / lmax) ** n if l2 > 0 else 0j
    if l1 == 0:
        u1 = 0j
    we_p, wo_p = parity_weights(p, n)
    we_q, wo_q = parity_weights(q, n)
    log_scale = n * math.log(lmax)

    def _overlap(num: complex, w_p: float, w_q: float) -> tuple[float, float]:
        if num == 0:
            return 0.0, 0.0
        log_mod = log_scale + math.log(abs(num)) - math.log(2) - 0.5 * (math.log(w_p) + math.log(w_q))
        return min(math.exp(log_mod), 1.0), math.atan2(num.imag, num.real)

    a_n, theta_a = _overlap(u1 + u2, we_p, we_q)
    b_n, theta_b = _overlap(u1 - u2, wo_p, wo_q)
    return OverlapData(a_n, theta_a, b_n, theta_b, mu1, mu2, l1, l2, lmax, lmin)


def lambda_max(p: float, q: float, phi: float) -> float:
    """sqrt(pq + (1-p)(1-q) + 2 sqrt(pq(1-p)(1-q)) |cos phi|)."""
    return math.sqrt(p * q + (1 - p) * (1 - q) + 2 * math.sqrt(p * q * (1 - p) * (1 - q)) * abs(math.cos(phi)))


# --- logical basis ---


def _collapse(norm_sq: float) -> float:
    return 0.0 if norm_sq <= COLLAPSE_TOL else math.sqrt(norm_sq)


def _branch_of_basis(bit: int, n: int) -> tuple[int, int]:
    """(Dicke index, parity) of |bit>^n."""
    j = 0 if bit == 0 else n
    return j, j % 2


def _log_weight(p: float, n: int, parity: int) -> float:
    return math.log(parity_weights(p, n)[parity])


def _degenerate_x(bit: int, other: float, n: int) -> float:
    """|<k_other | bit^n>|^2 for a basis state against the twirl of a pure state with parameter ``other``."""
    j, k = _branch_of_basis(bit, n)
    base = other if bit == 0 else 1 - other
    return min(math.exp(n * math.log(base) - _log_weight(other, n, k)), 1.0)


def _maxmixed_pair(h: PureQubit, n: int, pure_is_null: bool) -> LogicalPair:
    t = twirl_pure_analytic(h, n)
    ws = [w for w in (t.w_even, t.w_odd) if w > 0]
    labels = tuple(name for name, w in (("0_p", t.w_even), ("1_p", t.w_odd)) if w > 0)
    k = len(ws)
    flat = math.ldexp(1.0, -n)
    pure = np.diag(ws).astype(complex)
    mixed = np.eye(k, dtype=complex) * flat
    rest = max(1.0 - k * flat, 0.0)
    dim = 2 ** n - k
    if pure_is_null:
        return LogicalPair(pure, mixed, labels, (), Complement(dim, 0.0, rest))
    return LogicalPair(mixed, pure, labels, (), Complement(dim, rest, 0.0))


def logical_pair(h0: Hypothesis, h1: Hypothesis, n: int, tol: float = CLASSIFY_TOL) -> LogicalPair:
    """Matrices of Z[h0^n] and Z[h1^n] over a Gram-Schmidt basis of their joint span."""
    n = _check_n(n)
    if isinstance(h0, MaxMixed) and isinstance(h1, MaxMixed):
        one = np.ones((1, 1), dtype=complex)
        return LogicalPair(one, one.copy(), ("I",), (), case=None)
    if isinstance(h1, MaxMixed):
        return _maxmixed_pair(h0, n, pure_is_null=True)
    if isinstance(h0, MaxMixed):
        return _maxmixed_pair(h1, n, pure_is_null=False)

    case = classify(h0, h1, tol)
    p, q, phi = case.p, case.q, case.phi
    tag = case.tag

    if tag is CaseTag.IDENTICAL_TWIRL:
        we, wo = parity_weights(p, n)
        sigma = np.diag([we, wo]).astype(complex)
        return LogicalPair(sigma, sigma.copy(), ("0_p", "1_p"), (), case=tag)

    if tag is CaseTag.BASIS_ORTHOGONAL:
        sigma0 = np.diag([1.0, 0.0]).astype(complex)
        sigma1 = np.diag([0.0, 1.0]).astype(complex)
        return LogicalPair(sigma0, sigma1, ("psi0^n", "psi1^n"), (0,), case=tag)

    if tag is CaseTag.DEGENERATE_NULL:
        j, k = _branch_of_basis(h0.basis_bit, n)
        x = _degenerate_x(h0.basis_bit, q, n)
        c = math.sqrt(x) * complex(math.cos(j * phi), -math.sin(j * phi))
        s = _collapse(1 - x)
        v = np.zeros(3, dtype=complex)
        v[k] = c
        v[2] = s
        we_q, wo_q = parity_weights(q, n)
        sigma0 = np.outer(v, v.conj())
        sigma1 = np.diag([we_q, wo_q, 0.0]).astype(complex)
        povm = (2,) if s > 0 else ()
        return LogicalPair(sigma0, sigma1, ("0_q", "1_q", "2_L"), povm, case=tag)

    if tag is CaseTag.DEGENERATE_ALT:
        j, k = _branch_of_basis(h1.basis_bit, n)
        x = _degenerate_x(h1.basis_bit, p, n)
        c = math.sqrt(x) * complex(math.cos(j * phi), -math.sin(j * phi))
        s = _collapse(1 - x)
        weights = parity_weights(p, n)
        u = np.array([c, s, 0.0], dtype=complex)
        e2 = np.array([0.0, 0.0, 1.0], dtype=complex)
        sigma0 = weights[k] * np.outer(u, u.conj()) + weights[1 - k] * np.outer(e2, e2)
        sigma1 = np.diag([1.0, 0.0, 0.0]).astype(complex)
        povm = ((1,) if s > 0 else ()) + (2,)
        return LogicalPair(sigma0, sigma1, ("psi1^n", "1_L", "2_L"), povm, case=tag)

    ov = overlaps(p, q, phi, n)
    s_a = _collapse(1 - ov.a_n ** 2)
    s_b = _collapse(1 - ov.b_n ** 2)
    a = ov.even_overlap if s_a > 0 else complex(math.cos(ov.theta_a), math.sin(ov.theta_a))
    b = ov.odd_overlap if s_b > 0 else complex(math.cos(ov.theta_b), math.sin(ov.theta_b))
    we_p, wo_p = parity_weights(p, n)
    we_q, wo_q = parity_weights(q, n)
    u = np.array([a, 0.0, s_a, 0.0], dtype=complex)
    v = np.array([0.0, b, 0.0, s_b], dtype=complex)
    sigma0 = we_p * np.outer(u, u.conj()) + wo_p * np.outer(v, v.conj())
    sigma1 = np.diag([we_q, wo_q, 0.0, 0.0]).astype(complex)
    povm = tuple(i for i, s in ((2, s_a), (3, s_b)) if s > 0)
    return LogicalPair(sigma0, sigma1, ("0_q", "1_q", "2_L", "3_L"), povm, case=tag)


def logical_povm(psi0: PureQubit, psi1: PureQubit, n: int, tol: float = CLASSIFY_TOL) -> tuple[LogicalPair, BinaryTest]:
    lp = logical_pair(psi0, psi1, n, tol)
    if lp.case is CaseTag.IDENTICAL_TWIRL:
        raise UnsupportedCaseError("no parity-invariant test separates an IdenticalTwirl pair")
    e = np.zeros(lp.sigma0.shape[0])
    e[list(lp.povm)] = 1.0
    return lp, BinaryTest(np.diag(e).astype(complex))


# --- fixed zero-beta tests ---


def povm_acceptance(psi0: PureQubit, psi1: PureQubit, n: int, tol: float = CLASSIFY_TOL) -> float:
    """Closed-form Tr(Z[psi0^n] E_n) for the fixed zero-type-II test."""
    n = _check_n(n)
    case = classify(psi0, psi1, tol)
    tag = case.tag
    if tag is CaseTag.IDENTICAL_TWIRL:
        raise UnsupportedCaseError("no parity-invariant test separates an IdenticalTwirl pair")
    if tag is CaseTag.BASIS_ORTHOGONAL:
        return 1.0
    if tag is CaseTag.DEGENERATE_NULL:
        x = _degenerate_x(psi0.basis_bit, case.q, n)
        return 1 - x if 1 - x > COLLAPSE_TOL else 0.0
    if tag is CaseTag.DEGENERATE_ALT:
        base = case.p if psi1.basis_bit == 0 else 1 - case.p
        return -math.expm1(n * math.log(base))
    ov = overlaps(case.p, case.q, case.phi, n)
    we_p, wo_p = parity_weights(case.p, n)
    m33 = we_p * (1 - ov.a_n ** 2) if 1 - ov.a_n ** 2 > COLLAPSE_TOL else 0.0
    m44 = wo_p * (1 - ov.b_n ** 2) if 1 - ov.b_n ** 2 > COLLAPSE_TOL else 0.0
    return m33 + m44


def _gram_schmidt(target: np.ndarray, against: np.ndarray, expected_sq: float, label: str) -> np.ndarray:
    overlap = np.vdot(against, target)
    residual = target - overlap * against
    norm = float(np.linalg.norm(residual))
    if norm < GRAM_SCHMIDT_TOL:
        raise NumericalError(
            f"Gram-Schmidt vector {label} degenerated (norm {norm:.3e}, expected {math.sqrt(expected_sq):.3e})",
            {"vector": label, "numeric_norm": norm, "closed_form_norm_sq": expected_sq},
        )
    return residual / norm


def povm_vectors(
    psi0: PureQubit,
    psi1: PureQubit,
    n: int,
    tol: float = CLASSIFY_TOL,
    max_qubits: int | None = None,
) -> list[np.ndarray]:
    """Orthonormal 2^n vectors spanning the fixed zero-type-II test, by Gram-Schmidt on the twirl branches."""
    n = _check_n(n)
    check_dimension(2 ** n, max_qubits, "zero-beta POVM")
    lp = logical_pair(psi0, psi1, n, tol)
    tag = lp.case
    if tag is CaseTag.IDENTICAL_TWIRL:
        raise UnsupportedCaseError("no parity-invariant test separates an IdenticalTwirl pair")
    if tag is CaseTag.BASIS_ORTHOGONAL:
        return [ncopy_vector(psi0, n, max_qubits)]

    t0 = twirl_pure_analytic(psi0, n)
    t1 = twirl_pure_analytic(psi1, n)

    def dense(t, parity):
        return branch_dense(t.branch(parity), n, max_qubits)

    if tag is CaseTag.DEGENERATE_NULL:
        if 2 not in lp.povm:
            return []
        _, k = _branch_of_basis(psi0.basis_bit, n)
        expected = float(np.real(lp.sigma0[2, 2]))
        return [_gram_schmidt(ncopy_vector(psi0, n, max_qubits), dense(t1, k), expected, "2_L")]

    if tag is CaseTag.DEGENERATE_ALT:
        _, k = _branch_of_basis(psi1.basis_bit, n)
        vectors = []
        if 1 in lp.povm:
            expected = 1 - _degenerate_x(psi1.basis_bit, psi0.p, n)
            vectors.append(_gram_schmidt(dense(t0, k), ncopy_vector(psi1, n, max_qubits), expected, "1_L"))
        vectors.append(dense(t0, 1 - k))
        return vectors

    ov = overlaps(psi0.p, psi1.p, relative_phase(psi0, psi1), n)
    vectors = []
    if 2 in lp.povm:
        vectors.append(_gram_schmidt(dense(t0, 0), dense(t1, 0), 1 - ov.a_n ** 2, "2_L"))
    if 3 in lp.povm:
        vectors.append(_gram_schmidt(dense(t0, 1), dense(t1, 1), 1 - ov.b_n ** 2, "3_L"))
    return vectors


def optimal_povm(
    psi0: PureQubit,
    psi1: PureQubit,
    n: int,
    tol: float = CLASSIFY_TOL,
    max_qubits: int | None = None,
) -> BinaryTest:
    """The fixed zero-type-II test embedded in the 2^n-dimensional space."""
    vectors = povm_vectors(psi0, psi1, n, tol, max_qubits)
    dim = 2 ** n
    E = np.zeros((dim, dim), dtype=complex)
    for v in vectors:
        E += np.outer(v, v.conj())
    return BinaryTest(E)


# --- restricted beta ---


def restricted_beta(
    h0: Hypothesis,
    h1: Hypothesis,
    n: int,
    eps: float,
    method: str = "logical",
    tol: float = CLASSIFY_TOL,
    max_qubits: int | None = None,
    max_iterations: int = MAX_ITERATIONS,
    duality_tol: float = DUALITY_TOL,
) -> BetaResult:
    """Minimal type-II error over parity-invariant tests, i.e. beta_min on Z[h0^n], Z[h1^n].

    ``method="logical"`` works in the small Gram-Schmidt basis for any n;
    ``method="dense"`` twirls explicit 2^n matrices and is capped.
    """
    n = _check_n(n)
    eps = validate_eps(eps)
    if method == "logical":
        lp = logical_pair(h0, h1, n, tol)
        result = beta_min(lp.sigma0, lp.sigma1, eps, lp.complement, max_iterations, duality_tol)
    elif method == "dense":
        rho0 = twirl_dense(ncopy_dense(h0, n, max_qubits))
        rho1 = twirl_dense(ncopy_dense(h1, n, max_qubits))
        result = beta_min(rho0, rho1, eps, max_iterations=max_iterations, duality_tol=duality_tol)
    else:
        raise ValidationError(f"unknown method '{method}' (expected 'logical' or 'dense')")
    result.diagnostics["space"] = method
    return result


# --- critical copy number ---


def _log_weights_array(p: float, ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if p == 0.5:
        half = np.full(ns.shape, math.log(0.5))
        return half, half.copy()
    log_abs = math.log1p(-2 * (1 - p)) if p > 0.5 else math.log1p(-2 * p)
    log_t = ns * log_abs
    plus = np.log1p(np.exp(log_t)) - math.log(2)
    minus = np.log(-np.expm1(log_t)) - math.log(2)
    if p > 0.5:
        return plus, minus
    odd = ns % 2 == 1
    return np.where(odd, minus, plus), np.where(odd, plus, minus)


def _log_residuals(h0: Hypothesis, h1: PureQubit, case: CaseClass | None, ns: np.ndarray) -> np.ndarray:
    """log Tr(Z[h0^n] (I - E_n)) for the fixed zero-type-II test, vectorized over n."""
    ns = ns.astype(float)
    if case is None:
        # maximally mixed null against a pure alternative
        k = 1 if h1.basis_bit is not None else 2
        return math.log(k) - ns * math.log(2)
    tag = case.tag
    if tag is CaseTag.BASIS_ORTHOGONAL:
        return np.full(ns.shape, -np.inf)
    if tag is CaseTag.DEGENERATE_ALT:
        base = case.p if h1.basis_bit == 0 else 1 - case.p
        return ns * math.log(base)
    if tag is CaseTag.DEGENERATE_NULL:
        log_we, log_wo = _log_weights_array(case.q, ns)
        if h0.basis_bit == 0:
            return ns * math.log(case.q) - log_we
        odd = ns % 2 == 1
        return ns * math.log(1 - case.q) - np.where(odd, log_wo, log_we)
    _, _, z1, z2 = _z_pair(case.p, case.q, case.phi)
    lmax = max(abs(z1), abs(z2))
    log_u1 = np.log(z1 / lmax) if abs(z1) > 0 else -np.inf
    log_u2 = np.log(z2 / lmax) if abs(z2) > 0 else -np.inf
    u1 = np.exp(ns * log_u1)
    u2 = np.exp(ns * log_u2)
    log_we, log_wo = _log_weights_array(case.q, ns)
    inner = np.abs(u1 + u2) ** 2 / (4 * np.exp(log_we)) + np.abs(u1 - u2) ** 2 / (4 * np.exp(log_wo))
    with np.errstate(divide="ignore"):
        return 2 * ns * math.log(lmax) + np.log(inner)


def _guard(h0: Hypothesis, h1: PureQubit, case: CaseClass | None, eps: float) -> float:
    """An n beyond which a proven envelope keeps the residual at or below eps."""
    if case is None:
        return 1 + math.log2(2 / eps)
    tag = case.tag
    if tag is CaseTag.BASIS_ORTHOGONAL:
        return 1
    if tag is CaseTag.DEGENERATE_ALT:
        base = case.p if h1.basis_bit == 0 else 1 - case.p
        return math.log(eps) / math.log(base) + 1
    if tag is CaseTag.DEGENERATE_NULL:
        base = case.q if h0.basis_bit == 0 else 1 - case.q
        floor = min(case.q, 1 - case.q)
        return math.log(eps * floor) / math.log(base) + 1
    lam = lambda_max(case.p, case.q, case.phi)
    if lam >= 1:
        return math.inf
    return math.log(eps * case.q * (1 - case.q)) / (2 * math.log(lam)) + 1


def _pair_case(h0: Hypothesis, h1: Hypothesis, tol: float) -> CaseClass | None:
    if isinstance(h1, MaxMixed):
        raise UnsupportedCaseError("the alternative is full rank; no test reaches zero type-II error")
    if isinstance(h0, MaxMixed):
        return None
    case = classify(h0, h1, tol)
    if case.tag is CaseTag.IDENTICAL_TWIRL:
        raise UnsupportedCaseError("IdenticalTwirl pair: the twirled states coincide for every n")
    return case


def _ceil(x: float) -> int:
    return math.ceil(x - CRITICAL_SLACK)


def critical_n_formula(h0: Hypothesis, h1: Hypothesis, eps: float, tol: float = CLASSIFY_TOL) -> FormulaReport:
    eps = validate_eps(eps)
    case = _pair_case(h0, h1, tol)
    log_eps = math.log(eps)

    if case is None:
        # residual is 1/2^n against |0>, |1> and 2/2^n against any other pure state
        if h1.basis_bit is not None:
            n = max(_ceil(math.log2(1 / eps)), 1)
            return FormulaReport(n, float(n), float(n), descriptor="ceil(log2(1/eps))")
        n = theorem3_critical_n(eps)
        return FormulaReport(n, float(n), float(n), descriptor="ceil(log2(1/eps)) + 1")

    tag = case.tag
    if tag is CaseTag.BASIS_ORTHOGONAL:
        return FormulaReport(1, 1.0, 1.0, descriptor="1")

    if tag is CaseTag.DEGENERATE_ALT:
        base = case.p if h1.basis_bit == 0 else 1 - case.p
        x = log_eps / math.log(base)
        name = "p" if h1.basis_bit == 0 else "(1-p)"
        return FormulaReport(_ceil(x), x, x + 1, descriptor=f"ceil(log_{name} eps)")

    if tag is CaseTag.DEGENERATE_NULL:
        base = case.q if h0.basis_bit == 0 else 1 - case.q
        x = log_eps / math.log(base)
        if abs(base - 0.5) <= tol:
            n = _ceil(x + 1)
            return FormulaReport(n, x + 1, x + 2, descriptor="ceil(log_1/2 eps + 1)")
        if base > 0.5:
            return FormulaReport(None, x + 1, x + math.log(0.5) / math.log(base) + 1, descriptor="bracket")
        return FormulaReport(None, x, x + 2, descriptor="bracket")

    lam_max = lambda_max(case.p, case.q, case.phi)
    _, _, z1, z2 = _z_pair(case.p, case.q, case.phi)
    lam_min = min(abs(z1), abs(z2))
    log_l2 = 2 * math.log(lam_max)
    asymptotic = log_eps / log_l2
    if abs(math.cos(case.phi)) <= tol or lam_min >= lam_max:
        lower = asymptotic
    else:
        ratio = lam_min / lam_max
        lower = (log_eps - 2 * math.log1p(-ratio)) / log_l2
    upper = math.log(case.q * (1 - case.q) * eps) / log_l2 + 1
    return FormulaReport(
        None,
        max(lower, 1.0),
        upper,
        lambda_max=lam_max,
        asymptotic=asymptotic,
        descriptor="log_{lambda_max^2}(eps) + o(log 1/eps)",
    )


def critical_n_exact(
    h0: Hypothesis,
    h1: Hypothesis,
    eps: float,
    tol: float = CLASSIFY_TOL,
    max_iterations: int = MAX_CRITICAL_ITERATIONS,
) -> CriticalCopiesReport:
    """Smallest n from which the fixed zero-type-II test keeps type-I error <= eps.

    Scans residuals Tr(Z[h0^n](I - E_n)) in log space until an envelope
    guarantees they stay below eps; n_exact is one past the last violation.
    """
    eps = validate_eps(eps)
    case = _pair_case(h0, h1, tol)
    formula = critical_n_formula(h0, h1, eps, tol)
    log_limit = math.log(eps) + math.log1p(CRITICAL_SLACK)
    guard = _guard(h0, h1, case, eps)
    end = min(math.ceil(guard) + 1, max_iterations) if math.isfinite(guard) else max_iterations

    logs = []
    start = 1
    while start <= end:
        ns = np.arange(start, min(start + _CHUNK - 1, end) + 1)
        logs.append(_log_residuals(h0, h1, case, ns))
        start = ns[-1] + 1
    log_trace = np.concatenate(logs) if logs else np.zeros(0)
    residuals = np.exp(log_trace)

    if not math.isfinite(guard) or math.ceil(guard) + 1 > max_iterations:
        raise NonTerminationError(
            f"critical-copy search exceeded {max_iterations} iterations",
            residuals,
            {"eps": eps, "guard": guard, "last_residual": float(residuals[-1]) if len(residuals) else None},
        )

    violations = np.flatnonzero(log_trace > log_limit)
    n_exact = int(violations[-1]) + 2 if len(violations) else 1
    logger.debug("critical n = %d (scanned %d values, guard %.3f)", n_exact, len(residuals), guard)
    return CriticalCopiesReport(
        n_exact=n_exact,
        n_formula=formula.n_formula,
        lower_bound=formula.lower_bound,
        upper_bound=formula.upper_bound,
        residuals=residuals,
        lambda_max=formula.lambda_max,
        asymptotic=formula.asymptotic,
        descriptor=formula.descriptor,
    )


def residual(h0: Hypothesis, h1: PureQubit, n: int, tol: float = CLASSIFY_TOL) -> float:
    """Tr(Z[h0^n](I - E_n)) for the fixed zero-type-II test."""
    n = _check_n(n)
    case = _pair_case(h0, h1, tol)
    return float(np.exp(_log_residuals(h0, h1, case, np.array([n]))[0]))


# --- pure versus maximally mixed ---


def theorem3_beta(
    p: float,
    n: int,
    eps: float,
    max_iterations: int = MAX_ITERATIONS,
    duality_tol: float = DUALITY_TOL,
) -> ClosedForm:
    """Closed-form restricted beta for a pure null against the maximally mixed alternative."""
    n = _check_n(n)
    eps = validate_eps(eps)
    psi = PureQubit(p)
    d = math.exp(log_abs_delta_power(psi.p, n))
    half_scale = math.ldexp(1.0, n - 1)
    if eps >= 0.5:
        return ClosedForm((1 - eps) / ((1 + d) * half_scale), True, "eps>=1/2")
    if 1 - 2 * eps - d > 0:
        return ClosedForm((1 - d - eps) / ((1 - d) * half_scale), True, "eps<1/2")
    logger.info("closed form out of range for p=%g n=%d eps=%g; using the numerical dual", p, n, eps)
    value = restricted_beta(
        psi, MaxMixed(), n, eps, max_iterations=max_iterations, duality_tol=duality_tol
    ).beta_min
    return ClosedForm(value, False, "numerical")


def theorem3_critical_n(eps: float) -> int:
    """ceil(log2(1/eps)) + 1 copies make the maximally mixed null perfectly separable from any pure alternative."""
    eps = validate_eps(eps)
    return _ceil(math.log2(1 / eps)) + 1


def theorem3_povm(p: float, n: int, max_qubits: int | None = None) -> BinaryTest:
    """I minus the projectors onto the twirl branches of the pure state, as a dense 2^n test."""
    n = _check_n(n)
    check_dimension(2 ** n, max_qubits, "maximally mixed test")
    t = twirl_pure_analytic(PureQubit(p), n)
    dim = 2 ** n
    E = np.eye(dim, dtype=complex)
    for parity in (0, 1):
        if t.weight(parity) > 0:
            v = branch_dense(t.branch(parity), n, max_qubits)
            E -= np.outer(v, v.conj())
    return BinaryTest(E)
