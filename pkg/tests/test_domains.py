import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergtilde import domains as D
from bergtilde.errors import DomainError


def test_contains_examples():
    assert D.contains(D.disc(), 0)
    assert not D.contains(D.annulus(0.5), 0.25)
    assert not D.contains(D.punctured_disc(), 0)
    assert D.contains(D.ball(2), [0.6, 0.6j])
    assert not D.contains(D.ball(2), [0.8, 0.8])
    assert D.contains(D.polydisc(2), [0.8, 0.8])


def test_boundary_distance_examples():
    assert D.boundary_distance(D.disc(), 0) == 1.0
    assert D.boundary_distance(D.annulus(0.5), 0.75) == pytest.approx(0.25)
    assert D.boundary_distance(D.punctured_disc(), 0.001) == pytest.approx(0.001)
    assert D.boundary_distance(D.polydisc(2), [0.5, 0.9]) == pytest.approx(0.1)


def test_approach_sequence_examples():
    seq = D.approach_sequence(D.disc(), 1, 3)
    assert np.allclose(np.ravel(seq), [0.9, 0.99, 0.999])
    seq = D.approach_sequence(D.punctured_disc(), 0, 2)
    assert np.allclose(np.ravel(seq), [0.1, 0.01])
    seq = D.approach_sequence(D.ball(2), [1, 0], 1)
    assert np.allclose(seq[0], [0.9, 0.0])


@given(k=st.integers(1, 10), phase=st.floats(0, 2 * math.pi))
def test_approach_distance_is_power_of_ten(k, phase):
    target = np.exp(1j * phase)
    z = D.approach_sequence(D.disc(), target, k)[-1]
    assert D.boundary_distance(D.disc(), z) == pytest.approx(10.0 ** -k, rel=1e-6)


def test_annulus_approach_to_inner_circle():
    a = D.annulus(0.5)
    for k, z in enumerate(D.approach_sequence(a, 0.5, 4), start=1):
        assert D.boundary_distance(a, z) == pytest.approx(10.0 ** -k, rel=1e-9)


def test_invalid_domains_rejected():
    with pytest.raises(DomainError):
        D.annulus(1.5)
    with pytest.raises((DomainError, ValueError)):
        D.parse_domain("torus")
    with pytest.raises(DomainError):
        D.approach_sequence(D.disc(), 0.5, 3)


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1))
def test_sample_interior_stays_inside(seed):
    for d in (D.disc(), D.ball(3), D.polydisc(2), D.annulus(0.3), D.punctured_disc()):
        Z = D.sample_interior(d, 20, np.random.default_rng(seed), min_distance=0.01)
        assert np.all(D.margin(d, Z) >= 0.01)


def test_parse_roundtrip():
    assert D.parse_domain("ball:3") == D.ball(3)
    assert D.parse_domain("annulus:0.25").inner_radius == 0.25
    z = D.parse_complex_point("0.3+0.1j,-0.2j")
    assert np.array_equal(D.parse_complex_point(D.points_text([z])), z)
