"""Exterior powers of a finite coordinate space C^m.

A degree-``s`` wedge vector is stored by its Plücker coordinates: a map from
strictly increasing index tuples ``J`` to the coefficient of ``e_J``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

MAX_SUPPORT = 64


def canonical(indices) -> tuple[int, tuple[int, ...]]:
    """Sort an index tuple; return ``(sign of the permutation, sorted tuple)``.

    The sign is 0 when an index repeats.
    """
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, tuple(sorted(idx))
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


@dataclass(frozen=True)
class WedgeVector:
    degree: int
    ambient: int
    coords: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.degree <= self.ambient:
            raise ValueError("need 1 <= degree <= ambient")
        clean = {}
        for key, val in self.coords.items():
            sign, J = canonical(key)
            if len(J) != self.degree or (J and (J[0] < 0 or J[-1] >= self.ambient)):
                raise ValueError(f"index {key} does not fit degree {self.degree}, ambient {self.ambient}")
            if sign == 0:
                continue
            clean[J] = clean.get(J, 0j) + sign * complex(val)
        object.__setattr__(self, "coords", clean)

    def norm_sq(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.coords.values()))

    def support(self) -> list[int]:
        return sorted({i for J, v in self.coords.items() if v != 0 for i in J})

    def __mul__(self, c):
        return WedgeVector(self.degree, self.ambient, {J: c * v for J, v in self.coords.items()})

    __rmul__ = __mul__

    def __add__(self, other: "WedgeVector"):
        _check_shape(self, other)
        out = dict(self.coords)
        for J, v in other.coords.items():
            out[J] = out.get(J, 0j) + v
        return WedgeVector(self.degree, self.ambient, out)


def basis_wedge(indices, ambient: int) -> WedgeVector:
    """e_{j1} ^ ... ^ e_{js} (0-based indices)."""
    return WedgeVector(len(indices), ambient, {tuple(indices): 1.0})


def _check_shape(u: WedgeVector, v: WedgeVector):
    if u.degree != v.degree or u.ambient != v.ambient:
        raise ValueError(
            f"shape mismatch: ({u.degree}, {u.ambient}) vs ({v.degree}, {v.ambient})"
        )


def wedge_of(vectors) -> WedgeVector:
    """alpha_0 ^ ... ^ alpha_{s-1}: the coordinate at J is the s x s minor on columns J."""
    A = np.atleast_2d(np.asarray(vectors, dtype=complex))
    s, m = A.shape
    if not 1 <= s <= m:
        raise ValueError(f"cannot wedge {s} vectors in dimension {m}")
    combos = list(itertools.combinations(range(m), s))
    cols = np.array(combos)
    minors = np.linalg.det(np.moveaxis(A[:, cols], 1, 0))
    return WedgeVector(s, m, {J: v for J, v in zip(combos, minors) if v != 0})


def inner(u: WedgeVector, v: WedgeVector) -> complex:
    """<u, v> = sum_J u_J conj(v_J), the linear extension of the Gram-determinant pairing."""
    _check_shape(u, v)
    small, large = (u.coords, v.coords) if len(u.coords) <= len(v.coords) else (v.coords, u.coords)
    total = 0j
    for J in small:
        if J in large:
            total += u.coords[J] * np.conj(v.coords[J])
    return complex(total)


def gram_determinant(vectors) -> float:
    """det(<alpha_i, alpha_j>) computed as the squared norm of the wedge."""
    return wedge_of(vectors).norm_sq()


def plucker_relations(u: WedgeVector):
    """Yield ``(I, L, value)`` for every quadratic Plücker relation on the support of ``u``.

    value = sum_{i in L} rho * a_{I + {i}} a_{L - {i}}, where rho = +1 when the
    number of elements of L below i and the number of elements of I below i
    have equal parity and -1 otherwise; both index sets are read in increasing
    order.  Indices outside the support only produce identically zero relations,
    so the enumeration is restricted to the support.
    """
    s = u.degree
    supp = u.support()
    if len(supp) > MAX_SUPPORT:
        raise ValueError(f"support of size {len(supp)} exceeds the cap {MAX_SUPPORT}")
    a = u.coords
    for I in itertools.combinations(supp, s - 1):
        Iset = set(I)
        for L in itertools.combinations(supp, s + 1):
            total = 0j
            for pos, i in enumerate(L):
                if i in Iset:
                    continue
                left = a.get(tuple(sorted(I + (i,))))
                if left is None:
                    continue
                right = a.get(L[:pos] + L[pos + 1:])
                if right is None:
                    continue
                below_i = sum(1 for j in I if j < i)
                rho = 1 if (pos - below_i) % 2 == 0 else -1
                total += rho * left * right
            yield I, L, total


def plucker_residual(u: WedgeVector) -> float:
    """Largest absolute value of the Plücker relations of a nonzero wedge vector."""
    if u.norm_sq() == 0.0:
        raise ValueError("Plücker residual of the zero vector is undefined")
    return max((abs(v) for _, _, v in plucker_relations(u)), default=0.0)


def is_decomposable(u: WedgeVector, tol: float = 1e-9) -> bool:
    """True iff plucker_residual(u) / ||u||^2 <= tol."""
    return plucker_residual(u) / u.norm_sq() <= tol


def from_json(data) -> WedgeVector:
    """Build a wedge vector from ``{"ambient": m, "coords": {"0,1": re or [re, im], ...}}``."""
    coords = {}
    for key, val in data["coords"].items():
        J = tuple(int(t) for t in str(key).replace(" ", "").split(",") if t != "")
        coords[J] = complex(*val) if isinstance(val, (list, tuple)) else complex(val)
    degrees = {len(J) for J in coords}
    if len(degrees) != 1:
        raise ValueError("all coordinate keys must have the same degree")
    ambient = int(data.get("ambient", 1 + max(max(J) for J in coords)))
    return WedgeVector(degrees.pop(), ambient, coords)
