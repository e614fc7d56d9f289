"""Pluricomplex Green functions of the disc and the ball, and sublevel-set integrals.

On the ball ``G(zeta, a) = log |phi_a(zeta)|`` with ``phi_a`` the involutive
automorphism exchanging ``a`` and 0, using
``1 - |phi_a(zeta)|^2 = (1 - |a|^2)(1 - |zeta|^2) / |1 - <zeta, a>|^2``.
The disc is the case n = 1.

The sublevel set ``{G(., a) < level}`` is the image of the ball of radius
``rho = e^level`` under ``phi_a``: an ellipsoid centred at
``a (1 - rho^2) / (1 - rho^2 |a|^2)`` with semi-axis
``rho (1 - |a|^2) / (1 - rho^2 |a|^2)`` along ``a`` and
``rho sqrt(1 - |a|^2) / sqrt(1 - rho^2 |a|^2)`` across.  Monte Carlo samples
are drawn from a box around that ellipsoid, aligned with a unitary frame
containing ``a``, or from the ambient box ``[-1, 1]^(2n)`` when asked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criterion import gram, tilde_ratio
from .domains import DomainSpec, as_point, as_points, margin
from .errors import DomainError
from .rkhs import Source, basis_values, one_minus_norm_sq, source_domain

BATCHES = 32
MIN_SAMPLES = 1000
BOX_SLACK = 1.25


@dataclass(frozen=True, eq=False)
class GreenSpec:
    domain: DomainSpec
    pole: np.ndarray

    def __post_init__(self):
        if self.domain.kind not in ("disc", "ball"):
            raise DomainError(f"Green functions are implemented for the disc and the ball, not {self.domain.label}")
        p = as_point(self.domain, self.pole)
        if not margin(self.domain, p[None, :])[0] > 0:
            raise DomainError(f"pole {p} is not interior")
        object.__setattr__(self, "pole", p)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    samples: int
    seed: int


def green_values(g: GreenSpec, Z) -> np.ndarray:
    """G(zeta, pole) for a batch; ``-inf`` exactly at the pole."""
    Z = as_points(g.domain, Z)
    if not np.all(margin(g.domain, Z) > 0):
        raise DomainError("Green function evaluated outside the domain")
    a = g.pole
    one_a = float(one_minus_norm_sq(a[None, :])[0])
    one_z = one_minus_norm_sq(Z)
    denom = np.abs(1.0 - Z @ np.conj(a)) ** 2
    # log |phi|^2 = log(1 - q) with q = 1 - |phi|^2 in (0, 1]
    q = one_a * one_z / denom
    with np.errstate(divide="ignore"):
        out = 0.5 * np.log1p(-np.minimum(q, 1.0))
    out[np.all(Z == a[None, :], axis=1)] = -math.inf
    return out


def green_value(g: GreenSpec, zeta) -> float:
    """G(zeta, pole) <= 0, equal to ``-inf`` at the pole."""
    return float(green_values(g, as_point(g.domain, zeta)[None, :])[0])


def sublevel_ellipsoid(g: GreenSpec, level: float):
    """(centre, semi-axis along the pole, semi-axis across) of ``{G < level}``."""
    rho = math.exp(level)
    a = g.pole
    s = float(np.sum(np.abs(a) ** 2))
    one_a = float(one_minus_norm_sq(a[None, :])[0])
    scale = 1.0 - rho * rho * s
    centre = a * (1.0 - rho * rho) / scale
    return centre, rho * one_a / scale, rho * math.sqrt(one_a / scale)


def _frame(a: np.ndarray) -> np.ndarray:
    """Unitary matrix whose first column is a/|a| (identity at a = 0)."""
    n = len(a)
    r = np.linalg.norm(a)
    if r == 0.0:
        return np.eye(n, dtype=complex)
    u = a / r
    # rows 1.. of Vh span the orthogonal complement of u
    _, _, Vh = np.linalg.svd(np.conj(u)[None, :])
    return np.column_stack([u, np.conj(Vh[1:]).T])


def _sampler(g: GreenSpec, level: float, region: str):
    """Returns (box volume, map from uniform [-1,1]^(2n) samples to points)."""
    n = g.domain.dimension
    if region not in ("local", "ambient"):
        raise ValueError("region must be 'local' or 'ambient'")
    centre, along, across = sublevel_ellipsoid(g, level)
    half = BOX_SLACK * np.array([along] + [across] * (n - 1))
    volume = float(np.prod((2.0 * half) ** 2))
    if region == "ambient" or volume >= 4.0 ** n:
        return 4.0 ** n, lambda U: U[:, :n] + 1j * U[:, n:]
    Q = _frame(g.pole)

    def to_points(U):
        W = half[None, :] * (U[:, :n] + 1j * U[:, n:])
        return centre[None, :] + W @ Q.T

    return volume, to_points


def _batch_sizes(N: int) -> list[int]:
    base, extra = divmod(N, BATCHES)
    return [base + (1 if b < extra else 0) for b in range(BATCHES)]


def _monte_carlo(g: GreenSpec, level: float, N: int, seed: int, region: str, weights=None):
    """Batch-mean estimates of the integrals of ``w`` over ``{G < level}``, one per weight.

    Each batch draws from its own Philox stream keyed by ``(seed, batch)``, so
    the result does not depend on how batches are scheduled.
    """
    if N < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {N}")
    if not level < 0:
        raise ValueError("level must be negative")
    n = g.domain.dimension
    volume, to_points = _sampler(g, level, region)
    sizes = _batch_sizes(N)
    nw = 1 if weights is None else len(weights)
    sums = np.zeros((BATCHES, nw))
    for b, size in enumerate(sizes):
        rng = np.random.Generator(np.random.Philox(key=[seed, b]))
        Z = to_points(rng.uniform(-1.0, 1.0, size=(size, 2 * n)))
        inside = margin(g.domain, Z) > 0
        hit = np.zeros(size, dtype=bool)
        hit[inside] = green_values(g, Z[inside]) < level
        if weights is None:
            sums[b, 0] = np.count_nonzero(hit)
        elif hit.any():
            sums[b] = [float(np.sum(w(Z[hit]))) for w in weights]
    sizes = np.array(sizes, dtype=float)
    value = volume * sums.sum(axis=0) / N
    means = volume * sums / sizes[:, None]
    stderr = means.std(axis=0, ddof=1) / math.sqrt(BATCHES)
    return value, stderr


def sublevel_volume(g: GreenSpec, level: float = -1.0, N: int = 1_000_000, seed: int = 0,
                    region: str = "local") -> VolumeEstimate:
    """Lebesgue measure of ``{G(., pole) < level}`` by rejection sampling with 32 batch means."""
    value, stderr = _monte_carlo(g, level, N, seed, region)
    value = min(float(value[0]), g.domain.volume)
    return VolumeEstimate(value, float(stderr[0]), N, seed)


def exact_sublevel_volume(g: GreenSpec, level: float = -1.0) -> float:
    """Closed-form volume of the sublevel ellipsoid: pi^n/n! * along^2 * across^(2n-2)."""
    n = g.domain.dimension
    _, along, across = sublevel_ellipsoid(g, level)
    return math.pi ** n / math.factorial(n) * along ** 2 * across ** (2 * n - 2)


def extension_constant(n: int, sup_modulus: float) -> float:
    """C = 1 + exp(4n + 7 + sup_modulus^2)."""
    if n < 1 or not sup_modulus > 0:
        raise ValueError("need n >= 1 and sup_modulus > 0")
    return 1.0 + math.exp(4 * n + 7 + sup_modulus ** 2)


@dataclass(frozen=True)
class BoundRow:
    pole: np.ndarray
    constant: float
    masses: tuple
    mass_stderrs: tuple
    bound: float
    bound_upper: float
    ratio: float
    gram: float
    norm_product: float
    volume: float
    volume_stderr: float

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound_upper


def sublevel_masses(g: GreenSpec, fs, level: float = -1.0, N: int = 200_000, seed: int = 0,
                    region: str = "local"):
    """Integrals of |f_j|^2 over the sublevel set, with batch-mean standard errors."""
    fs = list(fs)
    basis = fs[0].basis
    weights = [lambda Z, c=f.coefficients: np.abs(basis_values(basis, Z) @ c) ** 2 for f in fs]
    return _monte_carlo(g, level, N, seed, region, weights)


def hyperconvexity_bound(source: Source, fs, poles, level: float = -1.0, N: int = 200_000,
                         seed: int = 0, region: str = "local") -> list[BoundRow]:
    """The chain  ratio <= Gram(f~) <= prod ||f~_j||^2 <= C^(n+1) prod_j int_{G<-1} |f_j|^2.

    ``source`` supplies the kernel in the ratio and should be the domain itself
    (closed-form kernel): a truncated kernel stays bounded at the boundary, so
    its ratio does not decay.  ``bound`` uses the Monte Carlo masses and ``bound_upper`` inflates each
    mass by three standard errors.
    """
    d = source_domain(source)
    fs = list(fs)
    n = d.dimension
    C = extension_constant(n, d.sup_modulus)
    g_fs = gram(fs)
    norms = float(np.prod([f.norm_sq() for f in fs]))
    rows = []
    for z in as_points(d, poles):
        g = GreenSpec(d, z)
        masses, errs = sublevel_masses(g, fs, level, N, seed, region)
        vol = sublevel_volume(g, level, N, seed, region)
        rep = tilde_ratio(source, fs, z)
        rows.append(BoundRow(
            pole=z, constant=C, masses=tuple(float(x) for x in masses),
            mass_stderrs=tuple(float(x) for x in errs),
            bound=C ** (n + 1) * float(np.prod(masses)),
            bound_upper=C ** (n + 1) * float(np.prod(masses + 3.0 * errs)),
            ratio=rep.ratio, gram=g_fs, norm_product=norms,
            volume=vol.value, volume_stderr=vol.stderr,
        ))
    return rows
