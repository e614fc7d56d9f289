import math

import numpy as np
import pytest

from bergtilde import domains as D, geodesy as G
from bergtilde.errors import DomainError


def _hyperbolic(a, b):
    """Exact Bergman distance on the disc: sqrt(2) artanh |(b - a) / (1 - conj(a) b)|."""
    return math.sqrt(2) * math.atanh(abs((b - a) / (1 - np.conj(a) * b)))


def test_straight_radial_length():
    p = G.Path.straight(0.0, 0.5, 1)
    assert G.path_length(D.disc(), "bergman", p) == pytest.approx(math.sqrt(2) * math.atanh(0.5), rel=1e-12)


def test_node_doubling_leaves_length_unchanged():
    a, b = 0.1 + 0.2j, -0.5 + 0.6j
    lengths = [G.path_length(D.disc(), "tilde", G.Path.straight(a, b, s)) for s in (1, 2, 4)]
    assert max(lengths) - min(lengths) < 1e-9 * lengths[0]


def test_degenerate_paths():
    with pytest.raises(DomainError):
        G.Path(np.array([[0.3], [0.3 + 1e-17]], dtype=complex))
    tiny = G.path_length(D.disc(), "bergman", G.Path.straight(0.3, 0.3 + 1e-9, 1))
    assert 0 < tiny < 1e-8


def test_path_must_stay_inside():
    with pytest.raises(DomainError):
        G.path_length(D.disc(), "bergman", G.Path.straight(0.0, 1.2, 2))
    assert not G.segment_inside(D.annulus(0.5), np.array([0.7]), np.array([-0.7]))
    assert G.segment_inside(D.annulus(0.5), np.array([0.9]), np.array([0.9j]))


def test_radial_distances():
    for rho in (0.3, 0.9, 0.999):
        bg = G.radial_distance(D.disc(), "bergman", 0.0, rho)
        assert bg == pytest.approx(math.sqrt(2) * math.atanh(rho), rel=1e-10)
        assert G.radial_distance(D.disc(), "tilde", 0.0, rho) / bg == pytest.approx(math.sqrt(3), rel=1e-8)
    pd = G.radial_distance(D.punctured_disc(), "tilde", 1e-8, 0.5)
    assert pd == pytest.approx(math.sqrt(6) * math.atanh(0.5), abs=1e-6)


def test_distance_upper_radial():
    est = G.distance_upper(D.disc(), "tilde", 0.0, 0.9)
    exact = math.sqrt(6) * math.atanh(0.9)
    assert exact * (1 - 1e-9) <= est <= exact * 1.01


def test_optimized_path_against_exact_distance():
    a, b = 0.3 + 0.2j, -0.4 + 0.5j
    res = G.optimize_path(D.disc(), "bergman", a, b, segments=16)
    exact = _hyperbolic(a, b)
    assert exact * (1 - 1e-9) <= res.length <= exact * (1 + 1e-3)
    assert res.length <= res.straight_length
    assert all(y <= x + 1e-12 * x for x, y in zip(res.history, res.history[1:]))
    back = G.optimize_path(D.disc(), "bergman", b, a, segments=16)
    assert abs(back.length - res.length) < 1e-6 * res.length


def test_triangle_inequality_of_estimates():
    a, b, c = 0.1 + 0.1j, 0.6 - 0.2j, -0.3 + 0.5j
    d = lambda p, q: G.distance_upper(D.disc(), "bergman", p, q)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-6


def test_ball_path_matches_radial_closed_form():
    # ball(2) Bergman metric along a ray: sqrt(3) / (1 - r^2), so the distance is sqrt(3) artanh r
    res = G.optimize_path(D.ball(2), "bergman", [0, 0], [0.6, 0.6j], segments=8, iters=20)
    assert res.length == pytest.approx(math.sqrt(3) * math.atanh(0.6 * math.sqrt(2)), rel=1e-3)


def test_probe_tilde_is_sqrt3_bergman_on_disc():
    t = G.completeness_probe(D.disc(), "tilde", 1.0, 5, anchor=0.0)
    b = G.completeness_probe(D.disc(), "bergman", 1.0, 5, anchor=0.0)
    for rt, rb in zip(t.rows, b.rows):
        assert rt.distance_estimate / rb.distance_estimate == pytest.approx(math.sqrt(3), rel=1e-8)
    slopes = t.running_slopes()
    assert slopes[-1] == pytest.approx(math.sqrt(6) / 2 * math.log(10), rel=0.05)


def test_punctured_disc_probe_is_bounded():
    limit = math.sqrt(6) * math.atanh(0.5)
    rows = G.completeness_probe(D.punctured_disc(), "tilde", 0.0, 8).rows
    dist = [r.distance_estimate for r in rows]
    assert all(x <= limit + 1e-3 for x in dist)
    assert all(y >= x for x, y in zip(dist, dist[1:]))
    assert abs(dist[-1] - limit) < 1e-3


def test_annulus_probe_grows():
    res = G.completeness_probe(D.annulus(0.5), "tilde", 0.5, 6)
    dist = [r.distance_estimate for r in res.rows]
    assert all(y > x for x, y in zip(dist, dist[1:]))
    assert res.slope > 0 and all(s > 0 for s in res.running_slopes()[1:])


def test_unknown_kind():
    with pytest.raises(ValueError):
        G.path_length(D.disc(), "euclid", G.Path.straight(0.0, 0.5, 1))
