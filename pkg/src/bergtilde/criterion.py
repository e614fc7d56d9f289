"""Completeness-criterion quantities inside a truncated Bergman space.

Functions ``f = sum_k c_k phi_k`` are represented by their coefficient
vectors against a :class:`~bergtilde.rkhs.BasisSpec`.  Inside the span of the
first ``m`` basis elements the truncated kernel is the reproducing kernel,
so the sup characterization of ``K^(n+1) det T`` holds exactly there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import wedge
from .domains import approach_sequence, as_point, boundary_distance
from .errors import DegenerateKernelError, DependentTupleError, OptimizerError
from .metrics import DEFAULT_STEP, bergman_tensors, bordered_log_det, complex_hessian, log_det_tensors
from .rkhs import BasisSpec, Source, bordered_matrices, jet_arrays, jet_rows, source_domain

GRAM_FLOOR = 1e-12
_WEDGE_TERM_CAP = 200_000


@dataclass(frozen=True, eq=False)
class FunctionVector:
    basis: BasisSpec
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).reshape(-1)
        if c.shape != (self.basis.m,):
            raise ValueError(f"expected {self.basis.m} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def __call__(self, z) -> complex:
        p = as_point(self.basis.domain, z)
        return complex(jet_rows(self.basis, p[None, :])[0, 0] @ self.coefficients)

    def jet(self, z) -> np.ndarray:
        """(f(z), df/dz_1, ..., df/dz_n)."""
        p = as_point(self.basis.domain, z)
        return jet_rows(self.basis, p[None, :])[0] @ self.coefficients


def basis_function(basis: BasisSpec, k: int) -> FunctionVector:
    c = np.zeros(basis.m, dtype=complex)
    c[k] = 1.0
    return FunctionVector(basis, c)


def leading_tuple(basis: BasisSpec) -> list[FunctionVector]:
    """(phi_0, ..., phi_n)."""
    return [basis_function(basis, k) for k in range(basis.n + 1)]


def dual_tuple(basis: BasisSpec, z) -> list[FunctionVector]:
    """Coefficients of K_m(., z) and dK_m(., zeta)/dzeta-bar_s at zeta = z."""
    p = as_point(basis.domain, z)
    A = jet_rows(basis, p[None, :])[0]
    return [FunctionVector(basis, np.conj(row)) for row in A]


def _coefficient_matrix(fs) -> tuple[BasisSpec, np.ndarray]:
    fs = list(fs)
    if not fs:
        raise ValueError("empty tuple")
    basis = fs[0].basis
    if any(f.basis is not basis for f in fs):
        raise ValueError("all functions must share one basis")
    if len(fs) != basis.n + 1:
        raise ValueError(f"need n+1 = {basis.n + 1} functions, got {len(fs)}")
    return basis, np.stack([f.coefficients for f in fs], axis=1)


def gram(fs) -> float:
    """Gram determinant of the tuple: the squared norm of f_0 ^ ... ^ f_n."""
    _, C = _coefficient_matrix(fs)
    cols = np.flatnonzero(np.any(C != 0, axis=1))
    s = C.shape[1]
    if len(cols) < s:
        return 0.0
    if math.comb(len(cols), s) > _WEDGE_TERM_CAP:
        return float(np.linalg.det(np.conj(C.T) @ C).real)
    return wedge.gram_determinant(C[cols].T)


def jet_matrix_det(fs, z, check_independent: bool = True) -> complex:
    """det of the (n+1)x(n+1) matrix with columns (f_j(z), df_j/dz_1(z), ..., df_j/dz_n(z))."""
    basis, C = _coefficient_matrix(fs)
    if check_independent and gram(fs) <= GRAM_FLOOR:
        raise DependentTupleError("functions are linearly dependent (Gram det <= 1e-12)")
    p = as_point(basis.domain, z)
    A = jet_rows(basis, p[None, :])[0]
    return complex(np.linalg.det(A @ C))


def norm_identity_residuals(source: Source, Z) -> np.ndarray:
    """|det B - K^(n+1) det T| / det B for a batch, B the bordered jet matrix."""
    B = bordered_matrices(source, Z)
    lhs = np.linalg.det(B).real
    if not np.all(lhs > 0.0):
        raise DegenerateKernelError("bordered jet matrix is singular")
    n = B.shape[1] - 1
    K = B[:, 0, 0].real
    rhs = K ** (n + 1) * np.linalg.det(bergman_tensors(source, Z)).real
    return np.abs(lhs - rhs) / lhs


def norm_identity_residual(source: Source, z) -> float:
    d = source_domain(source)
    return float(norm_identity_residuals(source, as_point(d, z)[None, :])[0])


def denominators(source: Source, Z) -> np.ndarray:
    """K^(n+1) det T, batched."""
    K, _, _ = jet_arrays(source, Z)
    n = source_domain(source).dimension
    den = K ** (n + 1) * np.linalg.det(bergman_tensors(source, Z)).real
    if not np.all(den > 0.0):
        raise DegenerateKernelError("K^(n+1) det T is not positive")
    return den


@dataclass(frozen=True)
class CriterionReport:
    numerator: float
    gram: float
    denominator: float
    ratio: float
    normalized: float

    def as_dict(self) -> dict:
        return dict(numerator=self.numerator, gram=self.gram, denominator=self.denominator,
                    ratio=self.ratio, normalized=self.normalized)


def tilde_ratio(source: Source, fs, z) -> CriterionReport:
    """|jet det|^2 against K^(n+1) det T (``ratio``) and against the Gramian (``normalized``)."""
    fs = list(fs)
    g = gram(fs)
    if g <= GRAM_FLOOR:
        raise DependentTupleError("functions are linearly dependent (Gram det <= 1e-12)")
    num = abs(jet_matrix_det(fs, z, check_independent=False)) ** 2
    d = source_domain(source)
    den = float(denominators(source, as_point(d, z)[None, :])[0])
    return CriterionReport(num, g, den, num / den, num / g)


@dataclass(frozen=True)
class SupProbe:
    best: float
    target: float
    values: tuple = field(default=())
    best_index: int = 0
    iterations: tuple = field(default=())

    @property
    def relative(self) -> float:
        return self.best / self.target


def _log_objective(A: np.ndarray, C: np.ndarray) -> float:
    s1, l1 = np.linalg.slogdet(A @ C)
    s2, l2 = np.linalg.slogdet(np.conj(C.T) @ C)
    if s1 == 0 or s2.real <= 0:
        return -math.inf
    return 2.0 * l1 - l2


def _ascend(A: np.ndarray, C: np.ndarray, iters: int, step: float):
    """Projected ascent of log(|det(AC)|^2 / det(C* C)); columns re-orthonormalized each step."""
    C, _ = np.linalg.qr(C)
    F = _log_objective(A, C)
    used = 0
    for used in range(1, iters + 1):
        if not math.isfinite(F):
            break
        M = np.linalg.inv(A @ C)
        direction = np.conj(A.T) @ np.conj(M.T) - C
        eta = step
        while eta > 1e-12:
            trial, _ = np.linalg.qr(C + eta * direction)
            Ft = _log_objective(A, trial)
            if Ft > F:
                break
            eta *= 0.5
        else:
            break
        gain = Ft - F
        C, F = trial, Ft
        if gain < 1e-15 * max(1.0, abs(F)):
            break
    return C, F, used


def fraction_sup_probe(basis: BasisSpec, z, restarts: int = 8, seed: int = 0,
                       iters: int = 200, step: float = 0.5) -> SupProbe:
    """Maximize |jet det|^2 / Gramian over (n+1)-tuples in the span of ``basis``.

    Restart 0 starts from the dual tuple (where the supremum is attained);
    restarts 1..``restarts`` start from seeded complex Gaussian tuples.  The best
    value is reduced deterministically, ties going to the lower restart index.
    """
    if not isinstance(basis, BasisSpec):
        raise TypeError("the sup probe optimizes over a truncated basis; pass a BasisSpec")
    p = as_point(basis.domain, z)
    A = jet_rows(basis, p[None, :])[0]
    target = float(denominators(basis, p[None, :])[0])
    rng = np.random.default_rng(seed)
    s = basis.n + 1
    starts = [np.conj(A.T)]
    for _ in range(restarts):
        starts.append(rng.standard_normal((basis.m, s)) + 1j * rng.standard_normal((basis.m, s)))
    values, used = [], []
    for k, C0 in enumerate(starts):
        C, F, it = _ascend(A, C0, iters, step)
        val = math.exp(F) if math.isfinite(F) else 0.0
        if not math.isfinite(val) or (k == 0 and val == 0.0):
            raise OptimizerError("sup probe diverged",
                                 dict(restart=k, log_objective=F, iterations=it, target=target))
        values.append(val)
        used.append(it)
    best_index = int(np.argmax(values))
    return SupProbe(values[best_index], target, tuple(values), best_index, tuple(used))


def fubini_pullback_residual(source: Source, z, h: float = DEFAULT_STEP,
                             richardson: bool = True) -> float:
    """Max-norm gap between ddbar log ||i(z) ^ j_1(z) ^ ... ^ j_n(z)||^2 and the modified tensor.

    The squared wedge norm is det of the bordered jet matrix, evaluated
    independently of the Bergman tensor; both Hessians use the same stencil.
    """
    d = source_domain(source)
    p = as_point(d, z)[None, :]
    pull = complex_hessian(lambda W: bordered_log_det(source, W), d, p, h, richardson)[0]
    ric = -complex_hessian(lambda W: log_det_tensors(source, W), d, p, h, richardson)[0]
    Tt = (d.dimension + 1) * bergman_tensors(source, p)[0] - ric
    return float(np.max(np.abs(pull - Tt)))


def kobayashi_ratio(source: Source, f: FunctionVector, z) -> float:
    """|f(z)|^2 / K(z, z)."""
    if f.norm_sq() == 0.0:
        raise ValueError("f must be nonzero")
    d = source_domain(source)
    K, _, _ = jet_arrays(source, as_point(d, z)[None, :])
    return abs(f(z)) ** 2 / float(K[0])


def criterion_sweep(source: Source, fs, target, kmax: int, direction=None) -> list[dict]:
    """tilde_ratio along the approach sequence toward a boundary point."""
    d = source_domain(source)
    rows = []
    for k, zk in enumerate(approach_sequence(d, target, kmax, direction), start=1):
        rep = tilde_ratio(source, fs, zk)
        rows.append(dict(k=k, boundary_distance=boundary_distance(d, zk), **rep.as_dict()))
    return rows
