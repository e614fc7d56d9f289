import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergtilde import criterion as C, domains as D, rkhs
from bergtilde.errors import DependentTupleError


def _random_tuple(basis, rng, count):
    m = len(basis.exponents)
    return [C.FunctionVector(basis, rng.standard_normal(m) + 1j * rng.standard_normal(m)) for _ in range(count)]


def test_jet_det_example():
    fs = C.leading_tuple(rkhs.build_basis(D.disc(), 2))
    assert C.jet_matrix_det(fs, 0).real == pytest.approx(math.sqrt(2) / math.pi, rel=1e-15)


def test_repeated_function():
    basis = rkhs.build_basis(D.disc(), 4)
    f = C.basis_function(basis, 2)
    assert C.jet_matrix_det([f, f], 0.3, check_independent=False) == 0
    with pytest.raises(DependentTupleError):
        C.jet_matrix_det([f, f], 0.3)
    with pytest.raises(DependentTupleError):
        C.tilde_ratio(basis, [f, f], 0.3)


def test_norm_identity_examples():
    assert C.norm_identity_residual(D.disc(), 0) < 1e-15
    assert C.norm_identity_residual(D.ball(2), [0, 0]) < 1e-15
    assert C.norm_identity_residual(rkhs.build_basis(D.disc(), 60), 0.5 + 0.3j) < 1e-8


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_norm_identity_holds_for_every_truncation(seed):
    rng = np.random.default_rng(seed)
    for d, m in ((D.disc(), 5), (D.ball(2), 7), (D.polydisc(3), 9), (D.annulus(0.3), 6)):
        Z = D.sample_interior(d, 5, rng, min_distance=0.05)
        assert np.max(C.norm_identity_residuals(rkhs.build_basis(d, m), Z)) < 1e-9


def test_dual_tuple_attains_denominator():
    for d, m, z in ((D.disc(), 10, 0.4 - 0.2j), (D.ball(2), 15, [0.3, 0.1j]), (D.annulus(0.5), 12, 0.7j)):
        basis = rkhs.build_basis(d, m)
        rep = C.tilde_ratio(basis, C.dual_tuple(basis, z), z)
        assert rep.normalized == pytest.approx(rep.denominator, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_fraction_inequality(seed):
    rng = np.random.default_rng(seed)
    for d, m in ((D.disc(), 10), (D.ball(2), 10)):
        basis = rkhs.build_basis(d, m)
        z = D.sample_interior(d, 1, rng, min_distance=0.05)[0]
        rep = C.tilde_ratio(basis, _random_tuple(basis, rng, d.dimension + 1), z)
        assert rep.normalized <= rep.denominator * (1 + 1e-9)
        assert rep.ratio <= rep.gram * (1 + 1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_ratio_invariant_under_recombination(seed):
    rng = np.random.default_rng(seed)
    basis = rkhs.build_basis(D.ball(2), 8)
    fs = _random_tuple(basis, rng, 3)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    gs = [C.FunctionVector(basis, sum(A[i, j] * fs[j].coefficients for j in range(3))) for i in range(3)]
    z = np.array([0.2 + 0.1j, -0.3])
    r1, r2 = C.tilde_ratio(basis, fs, z), C.tilde_ratio(basis, gs, z)
    assert r2.normalized == pytest.approx(r1.normalized, rel=1e-8)
    assert r2.gram == pytest.approx(abs(np.linalg.det(A)) ** 2 * r1.gram, rel=1e-8)


@pytest.mark.parametrize("d, m, z", [(D.disc(), 10, 0.0), (D.ball(2), 15, [0.3, 0.0])])
def test_sup_probe_bracket(d, m, z):
    probe = C.fraction_sup_probe(rkhs.build_basis(d, m), z, restarts=6, seed=1)
    assert probe.best <= probe.target * (1 + 1e-9)
    assert probe.values[0] >= probe.target * (1 - 1e-4)
    assert all(v <= probe.target * (1 + 1e-9) for v in probe.values)


def test_sup_probe_needs_basis():
    with pytest.raises(TypeError):
        C.fraction_sup_probe(D.disc(), 0.0)


def test_fubini_pullback():
    assert C.fubini_pullback_residual(D.disc(), 0.0) < 1e-5
    assert C.fubini_pullback_residual(D.ball(2), [0, 0]) < 1e-5
    assert C.fubini_pullback_residual(rkhs.build_basis(D.ball(2), 10), [0.2, 0.3j]) < 1e-5


def test_kobayashi_ratio():
    basis = rkhs.build_basis(D.disc(), 3)
    phi0 = C.basis_function(basis, 0)
    assert C.kobayashi_ratio(D.disc(), phi0, 0.0) == pytest.approx(1.0)
    for k in range(1, 6):
        x = 1 - 10.0 ** -k
        assert C.kobayashi_ratio(D.disc(), phi0, x) == pytest.approx((1 - x * x) ** 2, rel=1e-9)


def test_criterion_sweep_decays_like_closed_form():
    # |det|^2 = 2/pi^2 and K^2 det T = (2/pi^2)(1 - x^2)^-6, so the ratio is (1 - x^2)^6
    fs = C.leading_tuple(rkhs.build_basis(D.disc(), 2))
    rows = C.criterion_sweep(D.disc(), fs, 1.0, 6)
    base = C.tilde_ratio(D.disc(), fs, 0.0).ratio
    for r in rows:
        x = 1 - r["boundary_distance"]
        assert r["ratio"] / base == pytest.approx((1 - x * x) ** 6, rel=1e-8)
