"""Bergman tensor T, its Ricci tensor and the modified tensor (n+1)T - Ric.

``T`` comes straight from the exact kernel jet.  The Ricci tensor needs
fourth derivatives of the kernel, so it is computed as the complex Hessian of
``log det T`` by central differences on the real stencil, with one Richardson
step (steps ``h`` and ``2h``).
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .domains import DomainSpec, as_point, as_points, margin
from .errors import DegenerateKernelError, DomainError, NotPositiveDefiniteError
from .rkhs import Source, bordered_matrices, jet_arrays, one_minus_norm_sq, source_domain

DEFAULT_STEP = 1e-3
STEP_FRACTION = 128.0


def _hermitian(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def bergman_tensors(source: Source, Z) -> np.ndarray:
    """T_{i jbar} = (K K_{i jbar} - K_i K_jbar) / K^2 for a batch, shape ``(N, n, n)``."""
    K, G, M = jet_arrays(source, Z)
    T = (K[:, None, None] * M - G[:, :, None] * np.conj(G)[:, None, :]) / (K * K)[:, None, None]
    return _hermitian(T)


def log_det_tensors(source: Source, Z) -> np.ndarray:
    T = bergman_tensors(source, Z)
    sign, logdet = np.linalg.slogdet(T)
    if not np.all(sign.real > 0.5) or not np.all(np.isfinite(logdet)):
        raise DegenerateKernelError("det T <= 0 at a stencil node; basis too small?")
    return logdet


def bergman_tensor(source: Source, z) -> np.ndarray:
    """Bergman metric tensor at one point; raises if it is not positive definite."""
    d = source_domain(source)
    T = bergman_tensors(source, as_point(d, z)[None, :])[0]
    try:
        np.linalg.cholesky(T)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "Bergman tensor is not positive definite (degenerate truncation)"
        ) from None
    return T


def _coordinate_room(d: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Distance to the boundary when only coordinate ``i`` moves, shape ``(N, n)``.

    On the ball this is ``s / (sqrt(s + |z_i|^2) + |z_i|)`` with ``s = 1 - |z|^2``.
    The puncture is a removable singularity of the kernel, so on the punctured
    disc only the outer circle counts.
    """
    a = np.abs(Z)
    if d.kind == "polydisc":
        return 1.0 - a
    if d.kind in ("ball", "custom-series"):
        s = one_minus_norm_sq(Z)[:, None]
        return s / (np.sqrt(s + a * a) + a)
    if d.kind == "punctured-disc":
        return 1.0 - a
    return margin(d, Z)[:, None]


def effective_steps(d: DomainSpec, Z: np.ndarray, h: float) -> np.ndarray:
    """Per-point, per-coordinate steps, shape ``(N, n)``.

    Each is ``min(h, room_i / 128)`` rounded down to a power of two, where
    ``room_i`` is the distance to the boundary along coordinate ``i``.  Power-of-two
    steps make every stencil node exactly representable.  Scaling by the room
    keeps the Richardson truncation error (about ``(h / room)^4``) near 1e-9
    however close ``z`` is to the boundary, while directions parallel to a
    nearby face keep steps large enough to avoid cancellation.
    """
    if not 0.0 < h <= 0.1:
        raise DomainError("finite-difference step must lie in (0, 0.1]")
    if not np.all(margin(d, Z) > 0.0):
        raise DomainError(f"finite-difference centre outside {d.label}")
    raw = np.minimum(h, _coordinate_room(d, Z) / STEP_FRACTION)
    return np.exp2(np.floor(np.log2(raw)))


def _real_hessian(f: Callable, Z: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """Central-difference Hessian in real coordinates (x_1..x_n, y_1..y_n).

    ``f`` maps an ``(M, n)`` complex batch to ``(M,)`` reals; ``hs`` holds the
    per-coordinate steps ``(N, n)``.  Returns ``(N, 2n, 2n)``.
    """
    N, n = Z.shape
    dim = 2 * n
    units = np.concatenate([np.eye(n), 1j * np.eye(n)]).astype(complex)
    steps = np.concatenate([hs, hs], axis=1)
    pairs = [(p, q) for p in range(dim) for q in range(p + 1, dim)]
    coeffs = [np.zeros(dim)]
    for p in range(dim):
        e = np.eye(dim)[p]
        coeffs += [e, -e]
    for p, q in pairs:
        ep, eq = np.eye(dim)[p], np.eye(dim)[q]
        coeffs += [ep + eq, ep - eq, -ep + eq, -ep - eq]
    C = np.array(coeffs)
    nodes = Z[:, None, :] + (C[None, :, :] * steps[:, None, :]) @ units
    vals = f(nodes.reshape(-1, n)).reshape(N, len(C))
    H = np.empty((N, dim, dim))
    c = vals[:, 0]
    for p in range(dim):
        H[:, p, p] = (vals[:, 1 + 2 * p] - 2.0 * c + vals[:, 2 + 2 * p]) / steps[:, p] ** 2
    base = 1 + 2 * dim
    for k, (p, q) in enumerate(pairs):
        pp, pm, mp, mm = (vals[:, base + 4 * k + j] for j in range(4))
        H[:, p, q] = H[:, q, p] = (pp - pm - mp + mm) / (4.0 * steps[:, p] * steps[:, q])
    return H


def complex_hessian(f: Callable, d: DomainSpec, Z, h: float = DEFAULT_STEP,
                    richardson: bool = True) -> np.ndarray:
    """d^2 f / dz_i dzbar_j of a real function by finite differences, shape ``(N, n, n)``.

    With ``richardson`` the estimates at steps ``h`` and ``2h`` are combined as
    ``(4 D(h) - D(2h)) / 3``, which cancels the O(h^2) term.
    """
    Z = as_points(d, Z)
    n = d.dimension
    hs = effective_steps(d, Z, h)
    H = _real_hessian(f, Z, hs)
    if richardson:
        H = (4.0 * H - _real_hessian(f, Z, 2.0 * hs)) / 3.0
    xx, yy = H[:, :n, :n], H[:, n:, n:]
    xy, yx = H[:, :n, n:], H[:, n:, :n]
    return _hermitian(0.25 * ((xx + yy) + 1j * (xy - yx)))


def ricci_tensors(source: Source, Z, h: float = DEFAULT_STEP) -> np.ndarray:
    d = source_domain(source)
    return -complex_hessian(lambda W: log_det_tensors(source, W), d, Z, h)


def tilde_tensors(source: Source, Z, h: float = DEFAULT_STEP, check: bool = True) -> np.ndarray:
    """(n+1) T - Ric for a batch of points."""
    d = source_domain(source)
    Z = as_points(d, Z)
    Tt = (d.dimension + 1) * bergman_tensors(source, Z) - ricci_tensors(source, Z, h)
    if check:
        low = np.linalg.eigvalsh(Tt)[:, 0]
        if not np.all(low > 0.0):
            bad = int(np.argmin(low))
            raise NotPositiveDefiniteError(
                f"modified tensor not positive definite at {Z[bad]} "
                f"(smallest eigenvalue {low[bad]:.3e}); reduce the step or enlarge the basis"
            )
    return Tt


def ricci_tensor(source: Source, z, h: float = DEFAULT_STEP) -> np.ndarray:
    """Ric_{i jbar} = -d^2/dz_i dzbar_j log det T at one point."""
    d = source_domain(source)
    return ricci_tensors(source, as_point(d, z)[None, :], h)[0]


def tilde_tensor(source: Source, z, h: float = DEFAULT_STEP) -> np.ndarray:
    """(n+1) T + ddbar log det T at one point; raises unless positive definite."""
    d = source_domain(source)
    return tilde_tensors(source, as_point(d, z)[None, :], h)[0]


def tensors_at(source: Source, kind: str, Z, h: float = DEFAULT_STEP) -> np.ndarray:
    if kind == "bergman":
        return bergman_tensors(source, Z)
    if kind == "tilde":
        return tilde_tensors(source, Z, h)
    raise ValueError(f"unknown metric kind {kind!r}; expected 'bergman' or 'tilde'")


def vector_length(M, X) -> float:
    """sqrt(sum_ij M_{i jbar} X_i conj(X_j)) for a Hermitian positive semidefinite ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    X = np.atleast_1d(np.asarray(X, dtype=complex))
    if M.shape != (len(X), len(X)):
        raise DomainError(f"dimension mismatch: matrix {M.shape}, vector {X.shape}")
    q = float(np.real(X @ M @ np.conj(X)))
    return float(np.sqrt(max(q, 0.0)))


def vector_lengths(M: np.ndarray, X: np.ndarray) -> np.ndarray:
    q = np.real(np.einsum("ni,nij,nj->n", X, M, np.conj(X)))
    return np.sqrt(np.maximum(q, 0.0))


def bordered_log_det(source: Source, Z) -> np.ndarray:
    """log det of the bordered jet matrix, i.e. log K^(n+1) det T, batched."""
    sign, logdet = np.linalg.slogdet(bordered_matrices(source, Z))
    if not np.all(sign.real > 0.5):
        raise DegenerateKernelError("bordered jet matrix is not positive definite")
    return logdet
