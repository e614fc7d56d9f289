"""Bounded model domains in C^n.

Points are plain numpy arrays of complex coordinates, shape ``(n,)`` for a
single point or ``(N, n)`` for a batch.  Every domain here sits inside the
closed unit polydisc, so the ambient sampling box is always ``[-1, 1]^(2n)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError

KINDS = ("disc", "polydisc", "ball", "annulus", "punctured-disc", "custom-series")

# tolerance for "this point lies on the boundary"
_ON_BOUNDARY = 1e-9


@dataclass(frozen=True)
class DomainSpec:
    """A model domain.

    ``custom_terms`` holds ``(exponents, normalization)`` pairs for the
    ``custom-series`` kind, whose geometry is the unit ball of the given
    dimension.
    """

    kind: str
    dimension: int = 1
    inner_radius: float | None = None
    custom_terms: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise DomainError("dimension must be a positive integer")
        if self.kind in ("disc", "annulus", "punctured-disc") and self.dimension != 1:
            raise DomainError(f"{self.kind} has dimension 1")
        if self.kind == "annulus":
            r = self.inner_radius
            if r is None or not 0.0 < r < 1.0:
                raise DomainError("annulus requires inner_radius in (0, 1)")
        elif self.inner_radius is not None:
            raise DomainError("inner_radius only applies to the annulus")
        if self.kind == "custom-series":
            if not self.custom_terms:
                raise DomainError("custom-series requires custom_terms")
            terms = []
            for exps, norm in self.custom_terms:
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.dimension:
                    raise DomainError("custom term exponent length != dimension")
                if min(exps) < 0:
                    raise DomainError("custom terms must have nonnegative exponents")
                if not float(norm) > 0.0:
                    raise DomainError("custom normalizations must be strictly positive")
                terms.append((exps, float(norm)))
            if len({t[0] for t in terms}) != len(terms):
                raise DomainError("custom terms must be pairwise distinct")
            object.__setattr__(self, "custom_terms", tuple(terms))

    @property
    def n(self) -> int:
        return self.dimension

    @property
    def label(self) -> str:
        if self.kind in ("polydisc", "ball", "custom-series"):
            return f"{self.kind}:{self.dimension}"
        if self.kind == "annulus":
            return f"annulus:{self.inner_radius:g}"
        return self.kind

    @property
    def volume(self) -> float:
        n = self.dimension
        if self.kind == "polydisc":
            return math.pi ** n
        if self.kind in ("ball", "custom-series"):
            return math.pi ** n / math.factorial(n)
        if self.kind == "annulus":
            return math.pi * (1.0 - self.inner_radius ** 2)
        return math.pi

    @property
    def sup_modulus(self) -> float:
        """max |z| over the closure of the domain."""
        return math.sqrt(self.dimension) if self.kind == "polydisc" else 1.0

    @property
    def rotational(self) -> bool:
        return self.kind in ("disc", "annulus", "punctured-disc")


def disc() -> DomainSpec:
    return DomainSpec("disc")


def polydisc(n: int) -> DomainSpec:
    return DomainSpec("polydisc", n)


def ball(n: int) -> DomainSpec:
    return DomainSpec("ball", n)


def annulus(r: float) -> DomainSpec:
    return DomainSpec("annulus", 1, inner_radius=float(r))


def punctured_disc() -> DomainSpec:
    return DomainSpec("punctured-disc")


def custom_series(n: int, terms) -> DomainSpec:
    return DomainSpec("custom-series", n, custom_terms=tuple(terms))


def as_point(d: DomainSpec, z) -> np.ndarray:
    p = np.atleast_1d(np.asarray(z, dtype=complex))
    if p.ndim != 1 or p.shape[0] != d.dimension:
        raise DomainError(f"expected a point with {d.dimension} coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DomainError("point has non-finite coordinates")
    return p


def as_points(d: DomainSpec, Z) -> np.ndarray:
    P = np.asarray(Z, dtype=complex)
    if P.ndim == 1 and d.dimension == 1:
        P = P[:, None]
    if P.ndim != 2 or P.shape[1] != d.dimension:
        raise DomainError(f"expected points of shape (N, {d.dimension}), got {P.shape}")
    return P


def margin(d: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Signed margin for a batch ``(N, n)``: the boundary distance inside, <= 0 outside."""
    a = np.abs(Z)
    if d.kind == "polydisc":
        m = np.min(1.0 - a, axis=-1)
    elif d.kind in ("ball", "custom-series"):
        m = 1.0 - np.sqrt(np.sum(a * a, axis=-1))
    else:
        a = a[..., 0]
        m = 1.0 - a
        if d.kind == "annulus":
            m = np.minimum(m, a - d.inner_radius)
        elif d.kind == "punctured-disc":
            m = np.minimum(m, a)
    return np.where(np.all(np.isfinite(Z), axis=-1), m, -np.inf)


def contains(d: DomainSpec, z) -> bool:
    p = as_point(d, z)
    return bool(margin(d, p[None, :])[0] > 0.0)


def boundary_distance(d: DomainSpec, z) -> float:
    """Euclidean distance from an interior point to the boundary.

    The puncture of the punctured disc counts as boundary.
    """
    p = as_point(d, z)
    m = float(margin(d, p[None, :])[0])
    if not m > 0.0:
        raise DomainError(f"point {p} is not inside {d.label}")
    return m


def on_boundary(d: DomainSpec, z, tol: float = _ON_BOUNDARY) -> bool:
    p = as_point(d, z)
    a = np.abs(p)
    if d.kind == "polydisc":
        return bool(np.all(a <= 1.0 + tol) and np.any(abs(a - 1.0) <= tol))
    if d.kind in ("ball", "custom-series"):
        return abs(float(np.linalg.norm(p)) - 1.0) <= tol
    r = a[0]
    if abs(r - 1.0) <= tol:
        return True
    if d.kind == "annulus":
        return abs(r - d.inner_radius) <= tol
    if d.kind == "punctured-disc":
        return r <= tol
    return False


def approach_sequence(d: DomainSpec, target, kmax: int, direction=None) -> list[np.ndarray]:
    """Points ``z_k``, k = 1..kmax, with boundary distance ``10**-k`` tending to ``target``.

    The points move along the inward normal (radial ray).  ``direction`` picks the
    ray into the puncture of the punctured disc and defaults to the positive real axis.
    """
    if kmax < 1:
        raise DomainError("kmax must be >= 1")
    t = as_point(d, target)
    if not on_boundary(d, t):
        raise DomainError(f"target {t} is not on the boundary of {d.label}")
    a = np.abs(t)
    points = []
    for k in range(1, kmax + 1):
        eps = 10.0 ** (-k)
        if d.kind == "punctured-disc" and a[0] <= _ON_BOUNDARY:
            u = 1.0 + 0j if direction is None else complex(direction) / abs(complex(direction))
            z = np.array([eps * u])
        elif d.kind == "annulus" and abs(a[0] - d.inner_radius) <= _ON_BOUNDARY:
            z = (d.inner_radius + eps) * t / a
        elif d.kind == "polydisc":
            z = t.copy()
            face = np.abs(a - 1.0) <= _ON_BOUNDARY
            z[face] = (1.0 - eps) * t[face] / a[face]
        elif d.kind in ("ball", "custom-series"):
            z = (1.0 - eps) * t / np.linalg.norm(t)
        else:
            z = (1.0 - eps) * t / a
        bd = float(margin(d, z[None, :])[0])
        if abs(bd - eps) > 1e-12:
            raise DomainError(
                f"cannot reach boundary distance {eps:g} toward {t}: got {bd:g}"
            )
        points.append(z)
    return points


def default_anchor(d: DomainSpec, target=None) -> np.ndarray:
    """Interior anchor for distance probes.

    0.5 on the target ray for the disc and punctured disc, the mid radius on the
    ray for the annulus, the origin for ball-like domains and the polydisc.
    """
    if d.rotational:
        u = 1.0 + 0j
        if target is not None:
            t = complex(as_point(d, target)[0])
            if abs(t) > _ON_BOUNDARY:
                u = t / abs(t)
        rho = 0.5 * (1.0 + d.inner_radius) if d.kind == "annulus" else 0.5
        return np.array([rho * u])
    return np.zeros(d.dimension, dtype=complex)


def sample_interior(d: DomainSpec, count: int, rng: np.random.Generator,
                    min_distance: float = 0.0) -> np.ndarray:
    """Uniform rejection sample of ``count`` interior points, shape ``(count, n)``."""
    n = d.dimension
    out = []
    have = 0
    while have < count:
        raw = rng.uniform(-1.0, 1.0, size=(max(64, 4 * count), 2 * n))
        Z = raw[:, :n] + 1j * raw[:, n:]
        keep = Z[margin(d, Z) > min_distance]
        out.append(keep)
        have += len(keep)
    return np.concatenate(out)[:count]


def parse_complex_point(text: str) -> np.ndarray:
    """Parse ``"0.5+0.3j,0.1"`` into a coordinate array."""
    try:
        return np.array([complex(s.strip().replace(" ", "")) for s in text.split(",")])
    except ValueError as exc:
        raise DomainError(f"cannot parse point {text!r}") from exc


def load_custom_terms(path) -> tuple[int, list]:
    """Read a custom-series JSON file.

    Accepted layouts: ``{"dimension": n, "terms": [[[e1, ..], norm], ...]}`` or a bare
    list of ``[exponents, normalization]`` pairs (dimension inferred).
    """
    data = json.loads(Path(path).read_text())
    terms = data["terms"] if isinstance(data, dict) else data
    pairs = []
    for item in terms:
        if isinstance(item, dict):
            exps, norm = item["exponents"], item["normalization"]
        else:
            exps, norm = item
        pairs.append((tuple(int(e) for e in np.atleast_1d(exps)), float(norm)))
    if not pairs:
        raise DomainError("custom-series file has no terms")
    n = data.get("dimension", len(pairs[0][0])) if isinstance(data, dict) else len(pairs[0][0])
    return int(n), pairs


def parse_domain(text: str, custom_file=None) -> DomainSpec:
    """Parse the ``--domain`` flag syntax.

    ``disc | polydisc:<n> | ball:<n> | annulus:<r> | punctured-disc | custom-series[:<file>]``
    """
    kind, _, arg = text.strip().partition(":")
    try:
        if kind == "disc" and not arg:
            return disc()
        if kind == "punctured-disc" and not arg:
            return punctured_disc()
        if kind == "polydisc":
            return polydisc(int(arg or 1))
        if kind == "ball":
            return ball(int(arg or 1))
        if kind == "annulus":
            return annulus(float(arg))
        if kind == "custom-series":
            source = arg or custom_file
            if not source:
                raise DomainError("custom-series needs a JSON file")
            n, terms = load_custom_terms(source)
            return custom_series(n, terms)
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad domain specification {text!r}: {exc}") from exc
    raise DomainError(f"bad domain specification {text!r}")


def points_text(Z: Sequence) -> str:
    return ";".join(",".join(f"{c.real:.17g}{c.imag:+.17g}j" for c in np.atleast_1d(z)) for z in Z)
