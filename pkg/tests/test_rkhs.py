import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergtilde import domains as D, rkhs
from bergtilde.errors import DomainError


def _radial_gram(basis, r0, nodes=200):
    """Gram matrix of the basis on {r0 < |z| < 1} by tensor Gauss / trapezoid quadrature."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    rho = r0 + (1 - r0) * (x + 1) / 2
    wr = w * (1 - r0) / 2 * rho
    th = 2 * np.pi * np.arange(256) / 256
    Z = (rho[:, None] * np.exp(1j * th)[None, :]).reshape(-1, 1)
    W = (wr[:, None] * np.full(256, 2 * np.pi / 256)[None, :]).reshape(-1)
    V = rkhs.basis_values(basis, Z)
    return (np.conj(V).T * W) @ V


@pytest.mark.parametrize("d, r0", [(D.disc(), 0.0), (D.annulus(0.5), 0.5), (D.annulus(0.2), 0.2)])
def test_one_variable_bases_are_orthonormal(d, r0):
    G = _radial_gram(rkhs.build_basis(d, 9), r0)
    assert np.max(np.abs(G - np.eye(9))) < 1e-12


def test_ball_basis_is_orthonormal():
    # |z1|^2 = s cos^2 t, |z2|^2 = s sin^2 t in polar radius sqrt(s); integrate over s and t
    b = rkhs.build_basis(D.ball(2), 10)
    xs, ws = np.polynomial.legendre.leggauss(40)
    s = (xs + 1) / 2
    t = np.pi / 4 * (xs + 1)
    S, Tt = np.meshgrid(s, t, indexing="ij")
    weight = np.outer(ws / 2, ws * np.pi / 4)
    # dV = (2 pi)^2 r1 r2 dr1 dr2 and r1 = R cos t, r2 = R sin t, R^2 = s
    jac = (2 * np.pi) ** 2 * 0.5 * S * np.cos(Tt) * np.sin(Tt)
    for i, a in enumerate(b.exponents):
        for j, c in enumerate(b.exponents):
            if tuple(a) != tuple(c):
                continue  # angular integration kills distinct monomials
            f = S ** (a[0] + a[1]) * np.cos(Tt) ** (2 * a[0]) * np.sin(Tt) ** (2 * a[1])
            norm = np.sum(weight * jac * f)
            assert norm * math.exp(2 * b.log_norms[i]) == pytest.approx(1.0, rel=1e-12)


def test_basis_examples():
    b = rkhs.build_basis(D.disc(), 2)
    assert np.exp(b.log_norms) == pytest.approx([math.sqrt(1 / math.pi), math.sqrt(2 / math.pi)], rel=1e-15)
    a = rkhs.build_basis(D.annulus(0.5), 3)
    k = list(a.exponents.ravel()).index(-1)
    assert math.exp(a.log_norms[k]) == pytest.approx(1 / math.sqrt(2 * math.pi * math.log(2)), rel=1e-14)
    p, q = rkhs.build_basis(D.punctured_disc(), 3), rkhs.build_basis(D.disc(), 3)
    assert np.array_equal(p.exponents, q.exponents) and np.array_equal(p.log_norms, q.log_norms)
    with pytest.raises(DomainError):
        rkhs.build_basis(D.ball(2), 2)


def test_kernel_examples():
    assert rkhs.kernel_eval(D.disc(), 0, 0) == pytest.approx(1 / math.pi)
    assert rkhs.kernel_eval(D.disc(), 0.5, 0.5) == pytest.approx(16 / (9 * math.pi))
    series = rkhs.kernel_eval(rkhs.build_basis(D.disc(), 50), 0.5, 0.5)
    assert abs(series - 16 / (9 * math.pi)) < 1e-10
    jet = rkhs.kernel_jet(D.disc(), 0)
    assert jet.value == pytest.approx(1 / math.pi)
    assert abs(jet.holo_grad[0]) == 0 and jet.mixed[0, 0].real == pytest.approx(2 / math.pi)
    jb = rkhs.kernel_jet(D.ball(2), [0, 0])
    assert jb.value == pytest.approx(2 / math.pi ** 2)
    assert np.allclose(jb.mixed, 6 / math.pi ** 2 * np.eye(2), rtol=0, atol=1e-15)


def test_off_diagonal_kernel_against_ball_closed_form():
    b = rkhs.build_basis(D.ball(2), 300)
    z, w = np.array([0.3 + 0.1j, -0.2j]), np.array([0.1, 0.25 + 0.2j])
    exact = 2 / (math.pi ** 2 * (1 - np.vdot(w, z)) ** 3)
    assert abs(rkhs.kernel_eval(b, z, w) - exact) < 1e-10 * abs(exact)
    assert abs(rkhs.kernel_eval(D.ball(2), z, w) - exact) < 1e-13


@pytest.mark.parametrize("z", [0.58, 0.7 + 0.2j, -0.85j, 0.62 - 0.1j])
def test_annulus_closed_form_matches_series(z):
    d = D.annulus(0.5)
    exact, series = rkhs.kernel_jet(d, z), rkhs.kernel_jet(rkhs.build_basis(d, 400), z)
    assert series.value == pytest.approx(exact.value, rel=1e-11)
    assert np.allclose(series.holo_grad, exact.holo_grad, rtol=1e-10)
    assert np.allclose(series.mixed, exact.mixed, rtol=1e-10)


@settings(max_examples=40)
@given(seed=st.integers(0, 2**32 - 1))
def test_jet_invariants(seed):
    rng = np.random.default_rng(seed)
    for src in (D.disc(), D.ball(2), D.polydisc(2), D.annulus(0.4), rkhs.build_basis(D.ball(2), 10)):
        d = rkhs.source_domain(src)
        z = D.sample_interior(d, 1, rng, min_distance=0.05)[0]
        jet = rkhs.kernel_jet(src, z)
        assert jet.value > 0
        assert np.allclose(jet.antiholo_grad, np.conj(jet.holo_grad))
        assert np.allclose(jet.mixed, np.conj(jet.mixed.T))
        B = rkhs.bordered_matrices(src, z[None, :])[0]
        assert np.allclose(B, np.conj(B.T))
        assert np.linalg.eigvalsh(B)[0] > 0


def test_custom_series_kernel(tmp_path):
    d = D.custom_series(1, [((0,), 1.0), ((1,), 2.0), ((2,), 3.0)])
    b = rkhs.build_basis(d, 3)
    z = 0.4 - 0.1j
    expected = 1 + 4 * abs(z) ** 2 + 9 * abs(z) ** 4
    assert rkhs.kernel_eval(b, z, z) == pytest.approx(expected)
