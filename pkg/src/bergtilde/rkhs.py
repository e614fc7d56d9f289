"""Orthonormal monomial bases and the (truncated) Bergman kernel.

A *source* is either a :class:`BasisSpec` (the kernel is the truncated sum
``K_m(z, w) = sum_k phi_k(z) conj(phi_k(w))``) or a :class:`DomainSpec`
(the exact closed-form kernel, available for the disc, punctured disc,
ball, polydisc and annulus).

All derivatives are exact.  Monomials are evaluated in the log domain,
``c_k z^a = exp(log c_k + a . log z)``, so that bases with thousands of
terms (including the very negative Laurent exponents of the annulus) neither
overflow nor underflow in intermediate products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .domains import DomainSpec, as_point, as_points, margin
from .errors import DegenerateKernelError, DomainError


@dataclass(frozen=True, eq=False)
class BasisSpec:
    """First ``m`` orthonormal (Laurent) monomials of a domain's Bergman space.

    ``exponents`` has shape ``(m, n)``; ``log_norms[k]`` is the log of the
    normalization constant ``c_k = 1 / ||z^a_k||``.
    """

    domain: DomainSpec
    exponents: np.ndarray
    log_norms: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.exponents, dtype=np.int64)
        if e.ndim != 2 or e.shape[1] != self.domain.dimension:
            raise DomainError("exponents must have shape (m, n)")
        if len({tuple(r) for r in e}) != len(e):
            raise DomainError("basis terms must be pairwise distinct")
        if len(e) < self.domain.dimension + 1:
            raise DomainError("a basis needs at least n + 1 terms")
        ln = np.asarray(self.log_norms, dtype=float)
        if ln.shape != (len(e),) or not np.all(np.isfinite(ln)):
            raise DomainError("log_norms must be finite, one per term")
        e.setflags(write=False)
        ln.setflags(write=False)
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "log_norms", ln)

    @property
    def m(self) -> int:
        return len(self.exponents)

    @property
    def n(self) -> int:
        return self.domain.dimension

    @property
    def normalizations(self) -> np.ndarray:
        return np.exp(self.log_norms)

    @property
    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(int(a) for a in e), float(c))
                for e, c in zip(self.exponents, self.normalizations)]

    @cached_property
    def _derivative_tables(self):
        # d/dz_i (c z^a) = a_i c z^(a - e_i); a_i == 0 terms get log-coefficient -inf
        tables = []
        for i in range(self.n):
            a = self.exponents[:, i]
            exps = self.exponents.copy()
            exps[:, i] -= 1
            with np.errstate(divide="ignore"):
                logc = self.log_norms + np.log(np.abs(a).astype(float))
            tables.append((exps, logc, np.sign(a).astype(float)))
        return tables


Source = Union[BasisSpec, DomainSpec]


def source_domain(source: Source) -> DomainSpec:
    return source.domain if isinstance(source, BasisSpec) else source


def _graded_lex(n: int, count: int) -> list[tuple[int, ...]]:
    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    out: list[tuple[int, ...]] = []
    degree = 0
    while len(out) < count:
        out.extend(compositions(degree, n))
        degree += 1
    return out[:count]


def _annulus_log_norm_sq(k: int, r: float) -> float:
    """log of ||z^k||^2 = 2 pi int_r^1 rho^(2k+1) d rho on the annulus r < |z| < 1."""
    lr = math.log(r)
    j = k + 1
    if j == 0:
        return math.log(2.0 * math.pi * -lr)
    if j > 0:
        return math.log(math.pi) + math.log(-math.expm1(2 * j * lr)) - math.log(j)
    return math.log(math.pi) + 2 * j * lr + math.log(-math.expm1(-2 * j * lr)) - math.log(-j)


def build_basis(d: DomainSpec, m: int) -> BasisSpec:
    """Return the first ``m`` orthonormal monomials of the Bergman space of ``d``.

    Ordering is graded lexicographic (``(1, 0)`` before ``(0, 1)``); the annulus
    interleaves ``k = 0, 1, -1, 2, -2, ...``.  The punctured disc reuses the disc
    basis, since square-integrable holomorphic functions extend across the
    puncture.  Normalizations come from exact radial / beta integrals.
    """
    n = d.dimension
    if m < n + 1:
        raise DomainError(f"basis size m={m} must be at least n+1={n + 1}")
    log_pi = math.log(math.pi)
    if d.kind in ("disc", "punctured-disc"):
        exps = [(k,) for k in range(m)]
        logs = [0.5 * (math.log(k + 1) - log_pi) for k in range(m)]
    elif d.kind == "polydisc":
        exps = _graded_lex(n, m)
        logs = [0.5 * sum(math.log(a + 1) - log_pi for a in e) for e in exps]
    elif d.kind == "ball":
        exps = _graded_lex(n, m)
        logs = [0.5 * (math.lgamma(n + sum(e) + 1) - n * log_pi
                       - sum(math.lgamma(a + 1) for a in e)) for e in exps]
    elif d.kind == "annulus":
        ks = [0]
        j = 1
        while len(ks) < m:
            ks.extend((j, -j))
            j += 1
        exps = [(k,) for k in ks[:m]]
        logs = [-0.5 * _annulus_log_norm_sq(k, d.inner_radius) for (k,) in exps]
    elif d.kind == "custom-series":
        if m > len(d.custom_terms):
            raise DomainError(f"custom series has only {len(d.custom_terms)} terms")
        exps = [e for e, _ in d.custom_terms[:m]]
        logs = [math.log(c) for _, c in d.custom_terms[:m]]
    else:
        raise DomainError(f"unsupported domain kind {d.kind!r}")
    return BasisSpec(d, np.array(exps, dtype=np.int64), np.array(logs))


def _monomials(exps: np.ndarray, logc: np.ndarray, sign, Z: np.ndarray) -> np.ndarray:
    zero = Z == 0
    logz = np.log(np.where(zero, 1.0, Z))
    S = logc[None, :] + logz @ exps.T.astype(float)
    with np.errstate(under="ignore"):
        vals = np.exp(S)
    if sign is not None:
        vals = vals * sign[None, :]
    if zero.any():
        kill = (zero.astype(float) @ (exps != 0).T.astype(float)) > 0
        vals = np.where(kill, 0.0, vals)
        neg = (zero.astype(float) @ (exps < 0).T.astype(float)) > 0
        if np.any(neg & np.isfinite(logc)[None, :]):
            raise DomainError("negative exponent evaluated at a zero coordinate")
    return vals


def basis_values(basis: BasisSpec, Z) -> np.ndarray:
    """phi_k(z) for a batch of points: shape ``(N, m)``."""
    Z = as_points(basis.domain, Z)
    return _monomials(basis.exponents, basis.log_norms, None, Z)


def jet_rows(basis: BasisSpec, Z) -> np.ndarray:
    """Values and first holomorphic partials of every basis element.

    Shape ``(N, n+1, m)``: row 0 holds ``phi_k(z)``, row ``i`` holds
    ``d phi_k / d z_i``.
    """
    Z = as_points(basis.domain, Z)
    rows = [_monomials(basis.exponents, basis.log_norms, None, Z)]
    for exps, logc, sign in basis._derivative_tables:
        rows.append(_monomials(exps, logc, sign, Z))
    return np.stack(rows, axis=1)


def _check_inside(d: DomainSpec, Z: np.ndarray):
    if not np.all(margin(d, Z) > 0.0):
        raise DomainError(f"point outside {d.label}")


def _square_exact(a: np.ndarray):
    """a*a = p + e exactly (Veltkamp split)."""
    p = a * a
    c = 134217729.0 * a
    hi = c - (c - a)
    lo = a - hi
    e = ((hi * hi - p) + 2.0 * hi * lo) + lo * lo
    return p, e


def one_minus_norm_sq(Z: np.ndarray) -> np.ndarray:
    """1 - sum |z_i|^2 along the last axis, accurate to a few ulps of the result.

    Near the unit sphere the naive difference loses all digits of the boundary
    distance; here the squares are split exactly and summed with compensation.
    """
    parts = []
    for comp in (Z.real, Z.imag):
        p, e = _square_exact(comp)
        parts += [-p, -e]
    terms = np.concatenate(parts, axis=-1)
    total = np.ones(terms.shape[:-1])
    comp = np.zeros_like(total)
    for k in range(terms.shape[-1]):
        x = terms[..., k]
        t = total + x
        big = np.abs(total) >= np.abs(x)
        comp += np.where(big, (total - t) + x, (x - t) + total)
        total = t
    return total + comp


def _ball_jet(n: int, Z: np.ndarray):
    c = math.factorial(n) / math.pi ** n
    p = n + 1
    s = one_minus_norm_sq(Z)
    K = c * s ** (-p)
    G = (c * p) * np.conj(Z) * s[:, None] ** (-p - 1)
    eye = np.eye(n)[None, :, :]
    outer = np.conj(Z)[:, :, None] * Z[:, None, :]
    M = (c * p) * (eye * s[:, None, None] + (p + 1) * outer) * s[:, None, None] ** (-p - 2)
    return K, G, M


def _annulus_profile(r: float, t, one_minus_t, t_minus_r2):
    """K = F(t) on the annulus, t = z conj(w), and the derivatives F', F''.

    Summing the Laurent series geometrically over powers q = r^(2j) gives
    F(t) = [sum_{j>=0} q/(1 - q t)^2 + sum_{j>=1} q/(t - q)^2] / pi + 1/(2 pi log(1/r) t).
    The j = 0 and j = 1 denominators are passed in precomputed so that they
    keep full relative accuracy next to the two boundary circles.
    """
    J = int(math.ceil(20.0 / math.log(1.0 / r))) + 2
    q = r ** (2.0 * np.arange(1, J + 1))
    t = np.asarray(t)[..., None]
    a = 1.0 - q * t
    b = t - q
    a[..., 0], b[..., 0] = 1.0 - r * r * t[..., 0], t_minus_r2
    F = (1.0 / one_minus_t ** 2 + np.sum(q / a ** 2, -1) + np.sum(q / b ** 2, -1)) / math.pi
    F1 = (2.0 / one_minus_t ** 3 + np.sum(2 * q ** 2 / a ** 3, -1) - np.sum(2 * q / b ** 3, -1)) / math.pi
    F2 = (6.0 / one_minus_t ** 4 + np.sum(6 * q ** 3 / a ** 4, -1) + np.sum(6 * q / b ** 4, -1)) / math.pi
    c = 1.0 / (2.0 * math.pi * math.log(1.0 / r))
    t = t[..., 0]
    return F + c / t, F1 - c / t ** 2, F2 + 2.0 * c / t ** 3


def _annulus_jet(r: float, Z: np.ndarray):
    z = Z[:, 0]
    rho = np.abs(z)
    s = one_minus_norm_sq(Z)
    F, F1, F2 = _annulus_profile(r, rho * rho, s, (rho - r) * (rho + r))
    G = (F1 * np.conj(z))[:, None]
    M = (F1 + rho * rho * F2)[:, None, None]
    return F, G, M


def _closed_jet(d: DomainSpec, Z: np.ndarray):
    if d.kind == "annulus":
        return _annulus_jet(d.inner_radius, Z)
    if d.kind in ("disc", "punctured-disc", "ball"):
        return _ball_jet(d.dimension, Z)
    if d.kind == "polydisc":
        k, g, h = _ball_jet(1, Z.reshape(-1, 1))
        N, n = Z.shape
        k, g, h = k.reshape(N, n), g.reshape(N, n), h.reshape(N, n)
        K = np.prod(k, axis=1)
        ratio = g / k
        G = K[:, None] * ratio
        M = K[:, None, None] * ratio[:, :, None] * np.conj(ratio)[:, None, :]
        idx = np.arange(n)
        M[:, idx, idx] = K[:, None] * h / k
        return K, G, M
    raise DomainError(f"no closed-form kernel for {d.label}; use a series basis")


def bordered_matrices(source: Source, Z) -> np.ndarray:
    """Bordered jet matrices ``[[K, K_jbar], [K_i, K_ijbar]]``, shape ``(N, n+1, n+1)``."""
    d = source_domain(source)
    Z = as_points(d, Z)
    _check_inside(d, Z)
    if isinstance(source, BasisSpec):
        A = jet_rows(source, Z)
        return A @ np.conj(np.swapaxes(A, 1, 2))
    K, G, M = _closed_jet(d, Z)
    N, n = Z.shape
    B = np.empty((N, n + 1, n + 1), dtype=complex)
    B[:, 0, 0] = K
    B[:, 1:, 0] = G
    B[:, 0, 1:] = np.conj(G)
    B[:, 1:, 1:] = M
    return B


def jet_arrays(source: Source, Z):
    """Batched ``(K, K_i, K_ijbar)`` with shapes ``(N,)``, ``(N, n)``, ``(N, n, n)``."""
    B = bordered_matrices(source, Z)
    K = B[:, 0, 0].real
    if not np.all(K > 0.0):
        raise DegenerateKernelError("kernel K(z, z) is not positive; basis too small?")
    return K, B[:, 1:, 0], B[:, 1:, 1:]


@dataclass(frozen=True)
class KernelJet:
    """K(z, zeta-bar) and its mixed derivatives up to order (1, 1) on the diagonal."""

    value: float
    holo_grad: np.ndarray
    antiholo_grad: np.ndarray
    mixed: np.ndarray

    @property
    def n(self) -> int:
        return len(self.holo_grad)

    @property
    def bordered(self) -> np.ndarray:
        n = self.n
        B = np.empty((n + 1, n + 1), dtype=complex)
        B[0, 0] = self.value
        B[0, 1:] = self.antiholo_grad
        B[1:, 0] = self.holo_grad
        B[1:, 1:] = self.mixed
        return B


def kernel_jet(source: Source, z) -> KernelJet:
    d = source_domain(source)
    p = as_point(d, z)
    K, G, M = jet_arrays(source, p[None, :])
    return KernelJet(float(K[0]), G[0].copy(), np.conj(G[0]), M[0].copy())


def kernel_eval(source: Source, z, w) -> complex:
    """K(z, w-bar): the truncated sum for a basis, the exact kernel for a domain."""
    d = source_domain(source)
    zp, wp = as_point(d, z), as_point(d, w)
    _check_inside(d, np.stack([zp, wp]))
    if isinstance(source, BasisSpec):
        vals = basis_values(source, np.stack([zp, wp]))
        return complex(np.sum(vals[0] * np.conj(vals[1])))
    if d.kind in ("disc", "punctured-disc", "ball"):
        n = d.dimension
        c = math.factorial(n) / math.pi ** n
        return complex(c / (1.0 - np.sum(zp * np.conj(wp))) ** (n + 1))
    if d.kind == "polydisc":
        return complex(np.prod(1.0 / (math.pi * (1.0 - zp * np.conj(wp)) ** 2)))
    if d.kind == "annulus":
        r = d.inner_radius
        t = complex(zp[0] * np.conj(wp[0]))
        F, _, _ = _annulus_profile(r, np.array([t]), np.array([1.0 - t]), np.array([t - r * r]))
        return complex(F[0])
    raise DomainError(f"no closed-form kernel for {d.label}; use a series basis")


def basis_rows(basis: BasisSpec) -> list[tuple]:
    """Rows ``(index, exponents, normalization)`` for the basis CSV dump."""
    return [(k, " ".join(str(a) for a in e), c) for k, (e, c) in enumerate(basis.terms)]
