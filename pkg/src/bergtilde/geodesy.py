"""Path lengths, distance upper bounds and completeness probes.

Lengths are integrals of ``sqrt(X* M(z) X)`` along straight segments, computed
with Gauss-Legendre panels and bisection.  All pending panels are evaluated
in one batched tensor call per refinement round.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import (DomainSpec, approach_sequence, as_point, as_points, boundary_distance,
                      default_anchor, margin)
from .errors import DomainError, NumericalFailure, OptimizerError
from .metrics import DEFAULT_STEP, tensors_at, vector_lengths
from .rkhs import Source, source_domain

QUAD_ORDER = 8
QUAD_RTOL = 1e-10
MAX_DEPTH = 60
STALL_WINDOW = 5
STALL_RTOL = 1e-9


def _gauss01(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def segment_inside(d: DomainSpec, a: np.ndarray, b: np.ndarray) -> bool:
    """Whether the closed straight segment [a, b] lies in the open domain."""
    if not (margin(d, a[None, :])[0] > 0 and margin(d, b[None, :])[0] > 0):
        return False
    if d.kind not in ("annulus", "punctured-disc"):
        return True  # convex
    # the hole is a disc about 0: check the point of the segment closest to 0
    u = b[0] - a[0]
    t = 0.0 if u == 0 else min(1.0, max(0.0, -(np.conj(u) * a[0]).real / abs(u) ** 2))
    closest = abs(a[0] + t * u)
    hole = d.inner_radius if d.kind == "annulus" else 0.0
    return closest > hole


class _Integrand:
    """sqrt(X* M(a + t X) X) for the straight segments of a path, batched over (segment, t)."""

    def __init__(self, source: Source, kind: str, starts: np.ndarray, ends: np.ndarray, h: float):
        self.source, self.kind, self.h = source, kind, h
        self.starts, self.ends = starts, ends
        self.deltas = ends - starts

    def __call__(self, seg: np.ndarray, t: np.ndarray) -> np.ndarray:
        X = self.deltas[seg]
        Z = self.starts[seg] + t[:, None] * X
        M = tensors_at(self.source, self.kind, Z, self.h)
        return vector_lengths(M, X)


def _adaptive(fn, nseg: int, order: int, rtol: float):
    """Integrate fn(seg, t) over t in [0, 1] for each segment.

    Returns per-segment integrals and the accepted panels ``(seg, lo, hi, value)``.
    A panel is accepted when its two halves agree with it to ``rtol`` relative,
    or to ``1e-3 * rtol`` of the running total.
    """
    x, w = _gauss01(order)

    def panel_values(seg, lo, hi):
        width = hi - lo
        t = (lo[:, None] + width[:, None] * x[None, :]).ravel()
        s = np.repeat(seg, order)
        f = fn(s, t).reshape(len(seg), order)
        return width * (f @ w)

    seg = np.arange(nseg)
    lo, hi = np.zeros(nseg), np.ones(nseg)
    est = panel_values(seg, lo, hi)
    floor = 1e-3 * rtol * float(np.sum(np.abs(est)))
    totals = np.zeros(nseg)
    accepted = []
    depth = 0
    while len(seg):
        mid = 0.5 * (lo + hi)
        both = panel_values(np.concatenate([seg, seg]), np.concatenate([lo, mid]),
                            np.concatenate([mid, hi]))
        left, right = both[: len(seg)], both[len(seg):]
        fine = left + right
        if not np.all(np.isfinite(fine)):
            raise NumericalFailure("non-finite integrand on a path segment")
        err = np.abs(fine - est)
        done = (err <= rtol * np.abs(fine)) | (err <= floor) | (depth >= MAX_DEPTH)
        np.add.at(totals, seg[done], fine[done])
        accepted.extend(zip(seg[done], lo[done], mid[done], left[done]))
        accepted.extend(zip(seg[done], mid[done], hi[done], right[done]))
        keep = ~done
        seg = np.concatenate([seg[keep], seg[keep]])
        lo, hi = np.concatenate([lo[keep], mid[keep]]), np.concatenate([mid[keep], hi[keep]])
        est = np.concatenate([left[keep], right[keep]])
        depth += 1
    return totals, accepted


@dataclass(frozen=True, eq=False)
class Path:
    nodes: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.nodes, dtype=complex)
        if P.ndim == 1:
            P = P[:, None]
        if P.ndim != 2 or len(P) < 2:
            raise DomainError("a path needs at least two nodes")
        steps = np.linalg.norm(np.diff(P, axis=0), axis=1)
        if np.any(steps <= 1e-15):
            raise DomainError("consecutive path nodes coincide")
        object.__setattr__(self, "nodes", P)

    @classmethod
    def straight(cls, a, b, segments: int = 1):
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        b = np.atleast_1d(np.asarray(b, dtype=complex))
        t = np.linspace(0.0, 1.0, segments + 1)[:, None]
        return cls(a[None, :] + t * (b - a)[None, :])

    def reversed(self) -> "Path":
        return Path(self.nodes[::-1].copy())


def _check_path(d: DomainSpec, P: np.ndarray):
    P = as_points(d, P)
    for a, b in zip(P[:-1], P[1:]):
        if not segment_inside(d, a, b):
            raise DomainError(f"path segment {a} -> {b} leaves {d.label}")
    return P


def segment_lengths(source: Source, kind: str, path: Path, quad_order: int = QUAD_ORDER,
                    h: float = DEFAULT_STEP, rtol: float = QUAD_RTOL) -> np.ndarray:
    d = source_domain(source)
    P = _check_path(d, path.nodes)
    fn = _Integrand(source, kind, P[:-1], P[1:], h)
    totals, _ = _adaptive(fn, len(P) - 1, quad_order, rtol)
    return totals


def path_length(source: Source, kind: str, path: Path, quad_order: int = QUAD_ORDER,
                h: float = DEFAULT_STEP, rtol: float = QUAD_RTOL) -> float:
    """Length of a piecewise-straight path under the Bergman (``kind="bergman"``)
    or modified (``kind="tilde"``) metric."""
    return float(np.sum(segment_lengths(source, kind, path, quad_order, h, rtol)))


def radial_distance(source: Source, kind: str, r1: float, r2: float, direction=1.0,
                    h: float = DEFAULT_STEP, rtol: float = QUAD_RTOL) -> float:
    """Length of the ray segment from ``r1*u`` to ``r2*u``, ``u = direction/|direction|``.

    One-dimensional rotational domains only.  On the disc radial segments are
    geodesics, so this is the exact distance; elsewhere it is an upper bound.
    """
    d = source_domain(source)
    if not d.rotational:
        raise DomainError("radial distance needs the disc, annulus or punctured disc")
    if r1 == r2:
        return 0.0
    u = complex(direction) / abs(complex(direction))
    a, b = np.array([r1 * u]), np.array([r2 * u])
    if not segment_inside(d, a, b):
        raise DomainError(f"ray segment [{r1}, {r2}] leaves {d.label}")
    return path_length(source, kind, Path(np.stack([a, b])), h=h, rtol=rtol)


def _equal_length_nodes(source, kind, a, b, segments, h):
    """Nodes on the straight segment a -> b cutting it into pieces of equal metric length."""
    fn = _Integrand(source, kind, a[None, :], b[None, :], h)
    totals, panels = _adaptive(fn, 1, QUAD_ORDER, 1e-6)
    panels.sort(key=lambda p: p[1])
    knots = np.array([0.0] + [p[2] for p in panels])
    cum = np.concatenate([[0.0], np.cumsum([p[3] for p in panels])])
    targets = np.linspace(0.0, cum[-1], segments + 1)
    ts = np.interp(targets, cum, knots)
    ts[0], ts[-1] = 0.0, 1.0
    return a[None, :] + ts[:, None] * (b - a)[None, :]


class _FixedRule:
    """Fixed-order Gauss length of a node chain, vectorized over candidate chains."""

    def __init__(self, source, kind, order, h):
        self.source, self.kind, self.h = source, kind, h
        self.x, self.w = _gauss01(order)

    def seg_lengths(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        X = B - A
        Z = A[:, None, :] + self.x[None, :, None] * X[:, None, :]
        S, q, n = Z.shape
        M = tensors_at(self.source, self.kind, Z.reshape(-1, n), self.h)
        f = vector_lengths(M, np.repeat(X, q, axis=0)).reshape(S, q)
        return f @ self.w


@dataclass
class PathOptimization:
    length: float
    straight_length: float
    nodes: np.ndarray
    history: list = field(default_factory=list)
    iterations: int = 0


def optimize_path(source: Source, kind: str, a, b, segments: int = 16, iters: int = 200,
                  seed: int = 0, h: float = DEFAULT_STEP, quad_order: int = QUAD_ORDER,
                  rel_step: float = 1e-4, memory: int = 8) -> PathOptimization:
    """Shorten a (segments+1)-node path from ``a`` to ``b`` by preconditioned L-BFGS.

    The path starts as the straight segment with nodes at equal metric length.
    The objective is the fixed-order Gauss length of the chain; its gradient
    comes from central differences that move one interior node at a time and
    re-measure only the two adjacent segments.  The initial inverse Hessian is
    block diagonal, ``M(z_j)^{-1} / (1/l_left + 1/l_right)`` per node (``M`` the
    metric tensor, ``l`` the metric lengths of the adjacent segments), which is
    the transverse curvature of a chain of geodesic segments.  Steps that leave
    the domain are backtracked.  ``seed`` drives a tiny jitter of the initial
    interior nodes; the straight path is always kept as a candidate.  The run
    stops after ``iters`` iterations or once five iterations gain less than
    1e-9 relative.
    """
    d = source_domain(source)
    a, b = as_point(d, a), as_point(d, b)
    if segments < 1:
        raise ValueError("segments must be >= 1")
    if not (margin(d, a[None])[0] > 0 and margin(d, b[None])[0] > 0):
        raise DomainError("endpoints must be interior")
    if np.linalg.norm(b - a) <= 1e-15:
        return PathOptimization(0.0, 0.0, np.stack([a, b]))
    if not segment_inside(d, a, b):
        raise DomainError("straight initialization leaves the domain; choose other endpoints")
    n = d.dimension
    P0 = _equal_length_nodes(source, kind, a, b, segments, h)
    straight = path_length(source, kind, Path(P0), h=h)
    if segments == 1 or iters <= 0:
        return PathOptimization(straight, straight, P0, [straight], 0)

    rule = _FixedRule(source, kind, quad_order, h)
    J = segments - 1
    units = np.concatenate([np.eye(n), 1j * np.eye(n)]).astype(complex)

    def nodes_of(x):
        P = P0.copy()
        P[1:-1] = x[:, :n] + 1j * x[:, n:]
        return P

    def value(P):
        return rule.seg_lengths(P[:-1], P[1:])

    def feasible(P):
        if not np.all(margin(d, P) > 0):
            return False
        return all(segment_inside(d, p, q) for p, q in zip(P[:-1], P[1:]))

    def gradient(P):
        inner = P[1:-1]
        delta = rel_step * margin(d, inner)
        moved = inner[:, None, None, :] + (np.array([1.0, -1.0])[None, None, :, None]
                                           * delta[:, None, None, None] * units[None, :, None, :])
        prev = np.broadcast_to(P[:-2][:, None, None, :], moved.shape)
        nxt = np.broadcast_to(P[2:][:, None, None, :], moved.shape)
        L = (rule.seg_lengths(prev.reshape(-1, n), moved.reshape(-1, n))
             + rule.seg_lengths(moved.reshape(-1, n), nxt.reshape(-1, n))).reshape(J, 2 * n, 2)
        return (L[:, :, 0] - L[:, :, 1]) / (2.0 * delta[:, None])

    def precondition(P, seg, g):
        """Apply the block-diagonal inverse Hessian guess to a real gradient array."""
        M = tensors_at(source, kind, P[1:-1], h)
        weight = 1.0 / (1.0 / seg[:-1] + 1.0 / seg[1:])
        G = g[:, :n] + 1j * g[:, n:]
        r = np.linalg.solve(M, G[:, :, None])[:, :, 0] * weight[:, None]
        return np.concatenate([r.real, r.imag], axis=1)

    rng = np.random.default_rng(seed)
    x = np.concatenate([P0[1:-1].real, P0[1:-1].imag], axis=1)
    jitter = 1e-6 * margin(d, P0[1:-1])[:, None] * rng.standard_normal(x.shape)
    P = nodes_of(x + jitter)
    if feasible(P) and np.sum(value(P)) <= np.sum(value(P0)):
        x = x + jitter
    P = nodes_of(x)
    seg = value(P)
    F = float(np.sum(seg))
    g = gradient(P)
    history = [F]
    S, Y = [], []
    it = 0
    for it in range(1, iters + 1):
        if not np.all(np.isfinite(g)):
            raise OptimizerError("non-finite gradient", dict(iteration=it, length=F))
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s_i, y_i in zip(reversed(S), reversed(Y)):
            al = np.sum(s_i * q) / np.sum(y_i * s_i)
            alphas.append(al)
            q -= al * y_i
        r = precondition(P, seg, q)
        for (s_i, y_i), al in zip(zip(S, Y), reversed(alphas)):
            be = np.sum(y_i * r) / np.sum(y_i * s_i)
            r += s_i * (al - be)
        direction = -r
        slope = float(np.sum(g * direction))
        if not slope < 0:
            S, Y = [], []
            direction = -precondition(P, seg, g)
            slope = float(np.sum(g * direction))
        t = 1.0
        accepted = False
        while t > 1e-12:
            Pc = nodes_of(x + t * direction)
            if feasible(Pc):
                seg_c = value(Pc)
                Fc = float(np.sum(seg_c))
                if Fc <= F + 1e-4 * t * slope:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            if S:
                S, Y = [], []
                continue
            break
        x_new = x + t * direction
        g_new = gradient(Pc)
        s_vec, y_vec = x_new - x, g_new - g
        if np.sum(s_vec * y_vec) > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
            S.append(s_vec)
            Y.append(y_vec)
            if len(S) > memory:
                S.pop(0)
                Y.pop(0)
        x, P, seg, F, g = x_new, Pc, seg_c, Fc, g_new
        history.append(F)
        if len(history) > STALL_WINDOW and history[-1 - STALL_WINDOW] - F <= STALL_RTOL * F:
            break
    final = path_length(source, kind, Path(P), h=h)
    if final > straight:
        return PathOptimization(straight, straight, P0, history, it)
    return PathOptimization(final, straight, P, history, it)


def distance_upper(source: Source, kind: str, a, b, segments: int = 16, iters: int = 200,
                   seed: int = 0, h: float = DEFAULT_STEP) -> float:
    """Upper bound on the distance from ``a`` to ``b``: the length of an optimized path."""
    return optimize_path(source, kind, a, b, segments, iters, seed, h).length


@dataclass(frozen=True)
class ProbeRow:
    k: int
    point: np.ndarray
    boundary_distance: float
    distance_estimate: float


@dataclass(frozen=True)
class ProbeResult:
    rows: tuple
    slope: float
    anchor: np.ndarray
    method: str

    def running_slopes(self) -> list[float]:
        """Least-squares slope of distance against k over rows 1..k (nan for k = 1)."""
        ks = np.array([r.k for r in self.rows], dtype=float)
        ds = np.array([r.distance_estimate for r in self.rows])
        return [math.nan if i < 1 else float(np.polyfit(ks[: i + 1], ds[: i + 1], 1)[0])
                for i in range(len(ks))]


def completeness_probe(source: Source, kind: str, target, kmax: int, anchor=None,
                       segments: int = 16, iters: int = 200, seed: int = 0,
                       h: float = DEFAULT_STEP, direction=None) -> ProbeResult:
    """Distance from a fixed anchor to each approach point ``z_k`` toward ``target``.

    Rotational domains with the anchor on the approach ray use radial quadrature;
    otherwise each row is an optimized-path upper bound.
    """
    d = source_domain(source)
    points = approach_sequence(d, target, kmax, direction)
    u = None
    if d.rotational:
        phases = np.array([complex(z[0]) / abs(z[0]) for z in points])
        if np.all(np.abs(phases - phases[0]) < 1e-12):
            u = phases[0]
    if anchor is None:
        anchor = default_anchor(d, target)
        if u is not None:
            anchor = np.array([abs(anchor[0]) * u])
    else:
        anchor = as_point(d, anchor)
    # radial quadrature when the anchor lies on the common ray of the points
    radial = u is not None and abs(anchor[0] - abs(anchor[0]) * u) < 1e-12
    rows = []
    for k, z in enumerate(points, start=1):
        if radial:
            dist = radial_distance(source, kind, abs(anchor[0]), abs(z[0]), direction=u, h=h)
        else:
            dist = distance_upper(source, kind, anchor, z, segments, iters, seed, h)
        rows.append(ProbeRow(k, z, boundary_distance(d, z), dist))
    ks = np.array([r.k for r in rows], dtype=float)
    ds = np.array([r.distance_estimate for r in rows])
    slope = float(np.polyfit(ks, ds, 1)[0]) if len(rows) >= 2 else math.nan
    return ProbeResult(tuple(rows), slope, anchor, "radial" if radial else "path")
