import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergtilde import criterion as C, domains as D, green as GR, rkhs
from bergtilde.errors import DomainError

points = st.tuples(st.floats(0, 0.95), st.floats(0, 2 * math.pi)).map(lambda t: t[0] * np.exp(1j * t[1]))


def test_pole_at_origin_is_log_modulus():
    g = GR.GreenSpec(D.disc(), 0.0)
    for z in (0.5, 0.3j, -0.9 + 0.1j):
        assert GR.green_value(g, z) == pytest.approx(math.log(abs(z)), rel=1e-14)
    assert GR.green_value(g, 0.0) == -math.inf


@settings(max_examples=60)
@given(z=points, w=points)
def test_symmetry(z, w):
    if abs(z - w) < 1e-6:
        return
    a = GR.green_value(GR.GreenSpec(D.disc(), z), w)
    b = GR.green_value(GR.GreenSpec(D.disc(), w), z)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-14)
    assert a < 0


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1))
def test_vanishes_at_the_boundary(seed):
    rng = np.random.default_rng(seed)
    for d in (D.disc(), D.ball(2), D.ball(3)):
        n = d.dimension
        pole = D.sample_interior(d, 1, rng, min_distance=0.5)[0]
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z = (1 - 1e-4) * u / np.linalg.norm(u)
        assert -1e-3 < GR.green_value(GR.GreenSpec(d, pole), z) < 0


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1), level=st.floats(-3, -0.1))
def test_ellipsoid_boundary_is_the_level_set(seed, level):
    rng = np.random.default_rng(seed)
    d = D.ball(2)
    pole = D.sample_interior(d, 1, rng, min_distance=0.01)[0]
    g = GR.GreenSpec(d, pole)
    centre, along, across = GR.sublevel_ellipsoid(g, level)
    e0 = pole / np.linalg.norm(pole)
    e1 = np.array([-np.conj(e0[1]), np.conj(e0[0])])
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    z = centre + along * complex(v[0], v[1]) * e0 + across * complex(v[2], v[3]) * e1
    assert GR.green_value(g, z) == pytest.approx(level, rel=1e-9)


def test_disc_volume_at_origin():
    vol = GR.sublevel_volume(GR.GreenSpec(D.disc(), 0.0), -1.0, N=400_000, seed=3)
    assert abs(vol.value - math.pi * math.exp(-2)) <= 3 * vol.stderr
    assert vol.stderr > 0


@pytest.mark.parametrize("d, pole", [(D.disc(), 0.99), (D.disc(), -0.5 + 0.5j), (D.ball(2), [0.5, 0.3j]),
                                     (D.ball(3), [0.0, 0.9, 0.0])])
def test_volume_matches_ellipsoid(d, pole):
    g = GR.GreenSpec(d, pole)
    vol = GR.sublevel_volume(g, -1.0, N=200_000, seed=1)
    assert abs(vol.value - GR.exact_sublevel_volume(g, -1.0)) <= 3 * vol.stderr


def test_disc_ellipsoid_against_mobius_disc():
    # pseudo-hyperbolic disc of radius rho about a: centre a(1-rho^2)/(1-rho^2|a|^2), radius rho(1-|a|^2)/(1-rho^2|a|^2)
    a, rho = 0.99, math.exp(-1)
    radius = rho * (1 - a * a) / (1 - rho * rho * a * a)
    assert GR.exact_sublevel_volume(GR.GreenSpec(D.disc(), a)) == pytest.approx(math.pi * radius ** 2, rel=1e-13)


def test_ambient_and_local_sampling_agree():
    g = GR.GreenSpec(D.disc(), 0.4j)
    loc = GR.sublevel_volume(g, -1.0, N=200_000, seed=2)
    amb = GR.sublevel_volume(g, -1.0, N=200_000, seed=2, region="ambient")
    assert abs(loc.value - amb.value) <= 3 * math.hypot(loc.stderr, amb.stderr)


def test_full_disc_volume():
    vol = GR.sublevel_volume(GR.GreenSpec(D.disc(), 0.0), -1e-6, N=200_000, seed=4, region="ambient")
    assert abs(vol.value - math.pi) <= 3 * vol.stderr + 1e-5
    assert vol.value <= math.pi


def test_deterministic_and_seed_sensitive():
    g = GR.GreenSpec(D.ball(2), [0.2, 0.1j])
    a = GR.sublevel_volume(g, -1.0, N=20_000, seed=9)
    b = GR.sublevel_volume(g, -1.0, N=20_000, seed=9)
    c = GR.sublevel_volume(g, -1.0, N=20_000, seed=10)
    assert a == b and a.value != c.value


def test_volumes_shrink_along_approach():
    poles = D.approach_sequence(D.disc(), 1.0, 5)
    vols = [GR.sublevel_volume(GR.GreenSpec(D.disc(), p), -1.0, N=20_000, seed=0).value for p in poles]
    assert all(b < a for a, b in zip(vols, vols[1:]))
    assert vols[-1] < 1e-8


def test_extension_constant():
    assert GR.extension_constant(1, 1.0) == pytest.approx(1 + math.exp(12))
    assert GR.extension_constant(2, 1.0) == pytest.approx(1 + math.exp(16))
    with pytest.raises(ValueError):
        GR.extension_constant(0, 1.0)


def test_hyperconvexity_chain():
    fs = C.leading_tuple(rkhs.build_basis(D.disc(), 2))
    poles = D.approach_sequence(D.disc(), 1.0, 5)
    rows = GR.hyperconvexity_bound(D.disc(), fs, poles, N=50_000)
    assert all(r.constant == GR.extension_constant(1, 1.0) for r in rows)
    assert all(r.holds for r in rows)
    assert all(r.gram <= r.norm_product * (1 + 1e-12) for r in rows)
    bounds = [r.bound for r in rows]
    assert all(b < a for a, b in zip(bounds, bounds[1:]))
    assert bounds[-1] < 1e-3 * bounds[0]


def test_invalid_inputs():
    with pytest.raises(DomainError):
        GR.GreenSpec(D.annulus(0.5), 0.7)
    with pytest.raises(DomainError):
        GR.GreenSpec(D.disc(), 1.0)
    g = GR.GreenSpec(D.disc(), 0.0)
    with pytest.raises(ValueError):
        GR.sublevel_volume(g, -1.0, N=10)
    with pytest.raises(ValueError):
        GR.sublevel_volume(g, 0.5, N=2000)
    with pytest.raises(DomainError):
        GR.green_value(g, 1.5)
