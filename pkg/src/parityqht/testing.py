"""Binary quantum hypothesis testing with unrestricted measurements.

The minimal type-II error at type-I level eps is found from its one-variable
dual

    f(r) = (1 - eps) r - Tr(r rho0 - rho1)_+ ,    r >= 0,

which is concave and piecewise smooth. ``beta_min`` maximizes f over
[0, 1/eps] (f(r) <= 1 - eps r, so nothing beyond 1/eps can win) and then
builds the Neyman-Pearson test at the maximizer.

States may carry a ``Complement``: an extra block, orthogonal to the explicit
matrices, on which both states are multiples of the identity. This keeps
highly degenerate states such as I/2^n small.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.optimize

from parityqht.linalg import (
    NumericalError,
    ValidationError,
    check_dimension,
    check_hermitian,
    eigvalsh,
    hermitian_eig,
    is_diagonal,
    kron_power,
    positive_part_trace,
    trace_norm,
)
from parityqht.optimize import MAX_ITERATIONS, golden_section_max
from parityqht.states import DenseState
from parityqht.types import ExtendedReal

logger = logging.getLogger(__name__)

DUALITY_TOL = 1e-8
KERNEL_TOL = 1e-10
SUPPORT_TOL = 1e-12
FEASIBILITY_SLACK = 1e-9
SNAP_TOL = 1e-12
ROOT_XTOL = 1e-15
ROOT_RTOL = 1e-15

StateLike = DenseState | npt.ArrayLike


@dataclass(frozen=True)
class Complement:
    """Orthogonal block of dimension ``dim`` holding mass0 of rho0 and mass1 of rho1, spread uniformly."""

    dim: int
    mass0: float
    mass1: float

    def __post_init__(self):
        if self.dim < 0:
            raise ValidationError(f"complement dimension must be >= 0, got {self.dim}")
        if self.mass0 < -1e-12 or self.mass1 < -1e-12:
            raise ValidationError("complement masses must be nonnegative")
        if self.dim == 0 and (self.mass0 > 1e-12 or self.mass1 > 1e-12):
            raise ValidationError("an empty complement cannot carry mass")


@dataclass(frozen=True)
class BinaryTest:
    """Measurement operator E (accept the null), 0 <= E <= I.

    ``complement_weight`` is the multiple of the identity E takes on the
    complement block, when there is one.
    """

    E: np.ndarray = field(repr=False)
    complement_weight: float = 0.0

    def is_valid(self, tol: float = 1e-10) -> bool:
        w = eigvalsh(self.E)
        ok = len(w) == 0 or (w[0] >= -tol and w[-1] <= 1 + tol)
        return bool(ok and -tol <= self.complement_weight <= 1 + tol)


@dataclass(frozen=True)
class ErrorPair:
    alpha: float
    beta: float


@dataclass(frozen=True)
class BetaResult:
    beta_min: float
    r_star: float
    test: BinaryTest
    dhe: ExtendedReal
    errors: ErrorPair
    diagnostics: dict = field(default_factory=dict)

    @property
    def duality_gap(self) -> float:
        return self.diagnostics.get("duality_gap", 0.0)


# --- input handling ---


def _matrix(x: StateLike, name: str) -> np.ndarray:
    if isinstance(x, DenseState):
        return x.rho
    return check_hermitian(x, name=name)


def _pair(rho0n: StateLike, rho1n: StateLike) -> tuple[np.ndarray, np.ndarray]:
    a = _matrix(rho0n, "rho0")
    b = _matrix(rho1n, "rho1")
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def validate_eps(eps: float) -> float:
    eps = float(eps)
    if not math.isfinite(eps) or not 0 < eps < 1:
        raise ValidationError(f"eps must lie in the open interval (0, 1), got {eps}")
    return eps


def _real_trace(a: np.ndarray, e: np.ndarray) -> float:
    return float(np.real(np.vdot(a.conj().T, e)))


# --- primitives ---


def error_pair(
    rho0n: StateLike,
    rho1n: StateLike,
    test: BinaryTest,
    complement: Complement | None = None,
) -> ErrorPair:
    a, b = _pair(rho0n, rho1n)
    if test.E.shape != a.shape:
        raise ValidationError(f"test has shape {test.E.shape}, states have {a.shape}")
    accept0 = _real_trace(a, test.E)
    accept1 = _real_trace(b, test.E)
    if complement is not None:
        accept0 += test.complement_weight * complement.mass0
        accept1 += test.complement_weight * complement.mass1
    alpha = 1 - accept0
    beta = accept1
    for name, value in (("alpha", alpha), ("beta", beta)):
        if value < -1e-10 or value > 1 + 1e-10:
            logger.warning("%s = %.3e lies outside [0, 1]; clamping", name, value)
    return ErrorPair(min(max(alpha, 0.0), 1.0), min(max(beta, 0.0), 1.0))


def dual_f(
    r: float,
    rho0n: StateLike,
    rho1n: StateLike,
    eps: float,
    complement: Complement | None = None,
) -> float:
    eps = validate_eps(eps)
    if r < 0 or not math.isfinite(r):
        raise ValidationError(f"r must be a finite nonnegative number, got {r}")
    a, b = _pair(rho0n, rho1n)
    value = (1 - eps) * r - positive_part_trace(r * a - b)
    if complement is not None:
        value -= max(r * complement.mass0 - complement.mass1, 0.0)
    return value


# --- reduction to a small or diagonal problem ---


@dataclass
class _Problem:
    """rho0, rho1 in reduced coordinates. ``basis`` maps them back (None = identity)."""

    kind: str  # "diagonal" or "general"
    a: np.ndarray
    b: np.ndarray
    basis: np.ndarray | None
    comp: Complement | None


def _proportional_to_identity(m: np.ndarray) -> bool:
    if not is_diagonal(m, SUPPORT_TOL):
        return False
    d = np.real(np.diag(m))
    return bool(np.ptp(d) <= SUPPORT_TOL * max(float(np.max(np.abs(d))), 1e-300))


def _reduce(a: np.ndarray, b: np.ndarray, comp: Complement | None) -> _Problem:
    if is_diagonal(a) and is_diagonal(b):
        return _Problem("diagonal", np.real(np.diag(a)), np.real(np.diag(b)), None, comp)
    for m, other in ((b, a), (a, b)):
        if _proportional_to_identity(m):
            decomp = hermitian_eig(other)
            u = decomp.eigenvectors
            da = np.real(np.sum(u.conj() * (a @ u), axis=0))
            db = np.real(np.sum(u.conj() * (b @ u), axis=0))
            return _Problem("diagonal", da, db, u, comp)
    decomp = hermitian_eig(a + b)
    w = decomp.eigenvalues
    keep = w > SUPPORT_TOL * max(float(w[-1]), 1e-300)
    v = decomp.eigenvectors[:, keep]
    if keep.all():
        return _Problem("general", a, b, None, comp)
    return _Problem("general", v.conj().T @ a @ v, v.conj().T @ b @ v, v, comp)


class _Dual:
    """f(r) and its breakpoints for a reduced problem."""

    def __init__(self, problem: _Problem, eps: float):
        self.p = problem
        self.eps = eps
        comp = problem.comp
        self.m0 = comp.mass0 if comp else 0.0
        self.m1 = comp.mass1 if comp else 0.0

    def __call__(self, r: float) -> float:
        value = (1 - self.eps) * r - max(r * self.m0 - self.m1, 0.0)
        if self.p.kind == "diagonal":
            return value - float(np.sum(np.maximum(r * self.p.a - self.p.b, 0.0)))
        return value - positive_part_trace(r * self.p.a - self.p.b)

    def breakpoints(self) -> np.ndarray:
        upper = 1 / self.eps
        points = [0.0, upper]
        if self.m0 > 0:
            points.append(self.m1 / self.m0)
        if self.p.kind == "diagonal":
            pos = self.p.a > 0
            points.extend((self.p.b[pos] / self.p.a[pos]).tolist())
        elif self.p.a.shape[0] > 0:
            gen = scipy.linalg.eigvals(self.p.b, self.p.a)
            finite = np.isfinite(gen) & (np.abs(gen.imag) <= 1e-9 * (1 + np.abs(gen.real)))
            points.extend(gen.real[finite].tolist())
        pts = np.array(points, dtype=float)
        return _snap(pts[(pts >= 0) & (pts <= upper)])


def _snap(points: np.ndarray) -> np.ndarray:
    """Sorted points with near-duplicates (within SNAP_TOL * (1 + r)) merged into the first of them."""
    kept: list[float] = []
    for r in np.sort(points).tolist():
        if kept and r - kept[-1] <= SNAP_TOL * (1 + r):
            continue
        kept.append(r)
    return np.array(kept)


# --- Neyman-Pearson test ---


def _kernel_fill(weights: list[tuple[float, object]], need: float) -> tuple[dict, float]:
    """Greedy fractional fill of kernel directions in descending rho0 weight."""
    fractions = {}
    for weight, key in sorted(weights, key=lambda item: -item[0]):
        if need <= 0:
            break
        if weight <= 0:
            continue
        frac = min(1.0, need / weight)
        fractions[key] = frac
        need -= frac * weight
    return fractions, need


def _np_test(problem: _Problem, r: float, eps: float) -> tuple[BinaryTest, dict]:
    """Projector onto the positive part of r rho0 - rho1 plus a greedy kernel fill up to 1 - eps."""
    comp = problem.comp
    has_comp = comp is not None and comp.dim > 0
    m0 = comp.mass0 if has_comp else 0.0
    m1 = comp.mass1 if has_comp else 0.0
    comp_m = (r * m0 - m1) / comp.dim if has_comp else 0.0

    if problem.kind == "diagonal":
        lam = r * problem.a - problem.b
        vecs = None
    else:
        decomp = hermitian_eig(r * problem.a - problem.b)
        lam, vecs = decomp.eigenvalues, decomp.eigenvectors
    scale = max(float(np.max(np.abs(lam), initial=0.0)), abs(comp_m), 1e-300)
    tol = (KERNEL_TOL if r > 0 else SUPPORT_TOL) * scale
    kernel = np.abs(lam) <= tol
    positive = (lam > 0) & ~kernel
    comp_kernel = has_comp and abs(comp_m) <= tol
    comp_weight = 1.0 if has_comp and not comp_kernel and comp_m > 0 else 0.0

    weights: list[tuple[float, object]] = []
    if vecs is None:
        e = positive.astype(float)
        accepted = float(np.sum(e * problem.a))
        weights.extend((float(problem.a[i]), int(i)) for i in np.flatnonzero(kernel))
    else:
        vp = vecs[:, positive]
        e_red = vp @ vp.conj().T
        accepted = _real_trace(problem.a, e_red)
        vk = vecs[:, kernel]
        directions = {}
        if vk.shape[1] > 0:
            ak = vk.conj().T @ problem.a @ vk
            mu, w = scipy.linalg.eigh((ak + ak.conj().T) / 2)
            for k in range(len(mu)):
                directions[k] = vk @ w[:, k]
                weights.append((float(mu[k]), k))
    accepted += comp_weight * m0
    if comp_kernel:
        weights.append((m0, "complement"))

    fractions, unfilled = _kernel_fill(weights, (1 - eps) - accepted)
    for key, frac in fractions.items():
        if key == "complement":
            comp_weight = frac
        elif vecs is None:
            e[key] = frac
        else:
            u = directions[key]
            e_red = e_red + frac * np.outer(u, u.conj())

    if vecs is None:
        if problem.basis is None:
            E = np.diag(e).astype(complex)
        else:
            E = (problem.basis * e) @ problem.basis.conj().T
    elif problem.basis is None:
        E = e_red
    else:
        E = problem.basis @ e_red @ problem.basis.conj().T

    info: dict = {"kernel_dim": int(np.count_nonzero(kernel)) + int(comp_kernel)}
    if unfilled > FEASIBILITY_SLACK:
        logger.warning("kernel could not absorb type-I deficit %.3e at r=%.6g", unfilled, r)
        info["unfilled"] = unfilled
    return BinaryTest((E + E.conj().T) / 2, comp_weight), info


def _positive_mass(problem: _Problem, r: float) -> float:
    """rho0 mass on the strictly positive part of r rho0 - rho1 (complement included)."""
    comp = problem.comp
    mass = 0.0
    if comp is not None and comp.dim > 0 and r * comp.mass0 - comp.mass1 > 0:
        mass = comp.mass0
    if problem.kind == "diagonal":
        return mass + float(np.sum(problem.a[r * problem.a - problem.b > 0]))
    decomp = hermitian_eig(r * problem.a - problem.b)
    vp = decomp.eigenvectors[:, decomp.eigenvalues > 0]
    return mass + _real_trace(problem.a, vp @ vp.conj().T)


def _optimality_root(
    problem: _Problem,
    eps: float,
    brackets: list[tuple[float, float]],
    max_iterations: int,
) -> tuple[float, int]:
    """Point where the positive part of r rho0 - rho1 starts accepting 1 - eps of rho0.

    The acceptance mass is nondecreasing in r, so the first bracket whose ends
    straddle 1 - eps is refined with brentq. Returns (r, iterations).
    """

    def excess(r: float) -> float:
        return _positive_mass(problem, r) - (1 - eps)

    for lo, hi in brackets:
        if lo < hi and excess(lo) < 0 <= excess(hi):
            root, info = scipy.optimize.brentq(
                excess, lo, hi,
                xtol=ROOT_XTOL, rtol=ROOT_RTOL, maxiter=max_iterations,
                full_output=True, disp=False,
            )
            if not info.converged:
                raise NumericalError(
                    f"optimality condition not solved in {max_iterations} iterations",
                    {"bracket": [lo, hi], "iterations": info.iterations, "flag": info.flag},
                )
            return float(root), int(info.iterations)
    lo, hi = brackets[-1]
    return (lo if excess(lo) >= 0 else hi), 0


def _zero_beta_mass(problem: _Problem) -> float:
    """rho0 mass on the kernel of rho1 (including the complement when rho1 vanishes there)."""
    comp = problem.comp
    if problem.kind == "diagonal":
        b_scale = float(np.max(problem.b, initial=0.0))
    else:
        b_scale = float(eigvalsh(problem.b)[-1]) if problem.b.shape[0] else 0.0
    if comp is not None and comp.dim > 0:
        b_scale = max(b_scale, comp.mass1 / comp.dim)
    tol = SUPPORT_TOL * max(b_scale, 1e-300)
    mass = 0.0
    if comp is not None and comp.dim > 0 and comp.mass1 / comp.dim <= tol:
        mass += comp.mass0
    if problem.kind == "diagonal":
        mass += float(np.sum(problem.a[problem.b <= tol]))
    elif problem.b.shape[0]:
        decomp = hermitian_eig(problem.b)
        vk = decomp.eigenvectors[:, decomp.eigenvalues <= tol]
        mass += _real_trace(problem.a, vk @ vk.conj().T)
    return mass


def beta_min(
    rho0n: StateLike,
    rho1n: StateLike,
    eps: float,
    complement: Complement | None = None,
    max_iterations: int = MAX_ITERATIONS,
    duality_tol: float = DUALITY_TOL,
) -> BetaResult:
    """Minimal type-II error subject to type-I error <= eps.

    On the general path the best breakpoint bracket is searched with golden
    section and the maximizer is then pinned by solving Tr(rho0 P+(r)) = 1 - eps.

    Raises ValidationError for eps outside (0, 1) and NumericalError when a
    search does not converge or the constructed test exceeds eps.
    """
    eps = validate_eps(eps)
    a, b = _pair(rho0n, rho1n)
    problem = _reduce(a, b, complement)
    dual = _Dual(problem, eps)
    diagnostics: dict = {"path": problem.kind, "support_dim": int(problem.a.shape[0])}

    if _zero_beta_mass(problem) >= 1 - eps * (1 + FEASIBILITY_SLACK):
        r_star, f_max = 0.0, 0.0
        flat = (0.0, 0.0)
        diagnostics["path"] = "zero"
    else:
        points = dual.breakpoints()
        values = np.array([dual(r) for r in points])
        best = int(np.argmax(values))
        candidates = list(zip(points.tolist(), values.tolist()))
        root = None
        if problem.kind == "general" and len(points) > 1:
            lo = float(points[max(best - 1, 0)])
            hi = float(points[min(best + 1, len(points) - 1)])
            try:
                search = golden_section_max(dual, lo, hi, max_iterations=max_iterations)
                root, root_iterations = _optimality_root(
                    problem, eps, [search.bracket, (lo, hi)], max_iterations
                )
            except NumericalError as e:
                e.diagnostics.update({"eps": eps, "breakpoints": points.tolist()})
                raise
            candidates.append((search.x, search.fx))
            candidates.append((root, dual(root)))
            diagnostics["search_iterations"] = search.iterations
            diagnostics["root_iterations"] = root_iterations
        f_max = max(v for _, v in candidates)
        tie = 1e-12 * abs(f_max) + 1e-15
        near = sorted(r for r, v in candidates if v >= f_max - tie)
        r_star = root if root is not None else near[0]
        flat = (min(near[0], r_star), max(near[-1], r_star))
        f_max = max(f_max, dual(r_star))

    test, info = _np_test(problem, r_star, eps)
    diagnostics.update(info)
    errors = error_pair(a, b, test, complement)
    gap = abs(errors.beta - f_max)
    diagnostics.update({
        "flat_interval": [flat[0], flat[1]],
        "duality_gap": gap,
        "primal_alpha": errors.alpha,
        "primal_beta": errors.beta,
    })
    if gap > duality_tol:
        logger.warning("duality gap %.3e exceeds %.0e (r*=%.6g)", gap, duality_tol, r_star)
    if errors.alpha > eps + FEASIBILITY_SLACK:
        raise NumericalError(
            f"constructed test has type-I error {errors.alpha:.6g} above eps={eps:.6g}",
            {"eps": eps, **diagnostics},
        )

    value = min(max(f_max, 0.0), 1.0)
    return BetaResult(
        beta_min=value,
        r_star=r_star,
        test=test,
        dhe=neg_log2(value),
        errors=errors,
        diagnostics=diagnostics,
    )


def neg_log2(x: float) -> ExtendedReal:
    if x <= 0:
        return ExtendedReal.infinity()
    return ExtendedReal.finite(-math.log2(x))


def dhe(
    rho0n: StateLike,
    rho1n: StateLike,
    eps: float,
    complement: Complement | None = None,
) -> ExtendedReal:
    return beta_min(rho0n, rho1n, eps, complement).dhe


# --- entropies and symmetric discrimination ---


def qre(rho: StateLike, sigma: StateLike) -> ExtendedReal:
    """D(rho || sigma) in bits; +inf when supp(rho) is not inside supp(sigma)."""
    a, b = _pair(rho, sigma)
    sa = hermitian_eig(a)
    sb = hermitian_eig(b)
    lam = np.clip(sa.eigenvalues, 0.0, None)
    mu = np.clip(sb.eigenvalues, 0.0, None)
    overlap = np.abs(sa.eigenvectors.conj().T @ sb.eigenvectors) ** 2  # [i, j] = |<a_i|b_j>|^2
    weight = lam[:, None] * overlap
    outside = mu <= SUPPORT_TOL
    if float(np.sum(weight[:, outside])) > SUPPORT_TOL:
        return ExtendedReal.infinity()
    pos = lam > SUPPORT_TOL
    neg_entropy = float(np.sum(lam[pos] * np.log2(lam[pos])))
    cross = float(np.sum(weight[:, ~outside] * np.log2(mu[~outside])))
    return ExtendedReal.finite(max(neg_entropy - cross, 0.0))


def _check_prior(pi0: float) -> float:
    pi0 = float(pi0)
    if not math.isfinite(pi0) or not 0 < pi0 < 1:
        raise ValidationError(f"prior pi0 must lie in (0, 1), got {pi0}")
    return pi0


def symmetric_min_error(rho0n: StateLike, rho1n: StateLike, pi0: float = 0.5) -> float:
    pi0 = _check_prior(pi0)
    a, b = _pair(rho0n, rho1n)
    return 0.5 * (1 - trace_norm(pi0 * a - (1 - pi0) * b))


def helstrom_test(rho0n: StateLike, rho1n: StateLike, pi0: float = 0.5) -> BinaryTest:
    """Projector onto the positive part of pi0 rho0 - pi1 rho1."""
    pi0 = _check_prior(pi0)
    a, b = _pair(rho0n, rho1n)
    decomp = hermitian_eig(pi0 * a - (1 - pi0) * b)
    vp = decomp.eigenvectors[:, decomp.eigenvalues > 0]
    return BinaryTest(vp @ vp.conj().T)


def chernoff_exponent(rho0: StateLike, rho1: StateLike) -> ExtendedReal:
    """-log2 min_s Tr(rho0^s rho1^(1-s)) over s in [0, 1]."""
    a, b = _pair(rho0, rho1)
    sa = hermitian_eig(a)
    sb = hermitian_eig(b)
    pa = sa.eigenvalues > SUPPORT_TOL
    pb = sb.eigenvalues > SUPPORT_TOL
    lam = sa.eigenvalues[pa]
    mu = sb.eigenvalues[pb]
    overlap = np.abs(sa.eigenvectors[:, pa].conj().T @ sb.eigenvectors[:, pb]) ** 2
    if overlap.size == 0 or float(np.max(overlap)) <= SUPPORT_TOL:
        return ExtendedReal.infinity()
    log_lam = np.log(lam)[:, None]
    log_mu = np.log(mu)[None, :]

    def q(s: float) -> float:
        return float(np.sum(overlap * np.exp(s * log_lam + (1 - s) * log_mu)))

    # endpoint limits: Tr(P0 rho1) and Tr(rho0 P1)
    q0 = float(np.sum(overlap * mu[None, :]))
    q1 = float(np.sum(overlap * lam[:, None]))
    search = scipy.optimize.minimize_scalar(q, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    q_min = min(float(search.fun), q0, q1)
    if q_min <= 0:
        return ExtendedReal.infinity()
    return ExtendedReal.finite(max(-math.log2(q_min), 0.0))


def stein_rate(
    rho0: StateLike,
    rho1: StateLike,
    n: int,
    eps: float,
    max_qubits: int | None = None,
) -> ExtendedReal:
    """D_H^eps(rho0^n || rho1^n) / n for single-qubit inputs, computed densely."""
    a, b = _pair(rho0, rho1)
    check_dimension(a.shape[0] ** n, max_qubits, f"{n}-copy state")
    return dhe(kron_power(a, n, max_qubits), kron_power(b, n, max_qubits), eps).scaled(1 / n)
