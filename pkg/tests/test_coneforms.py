import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conestab.coneforms import (
    FourierTorus,
    HomogeneousOneForm,
    HomogeneousTwoForm,
    SphereS1,
    UnsupportedOperation,
    adjoint_sign,
    asd_closed_reduction,
    beltrami_field,
    codiff_by_convention,
    cone_d_2form,
    cone_oneform_residuals,
    critical_oneform_obstruction,
    curl,
    curl_spectrum,
    eigenmode_solution,
    fhn_residuals,
    hodge_eigenvalue_of_homogeneity,
    hodge_psd_check,
    hodge_spectrum,
    homogeneity_for_eigenvalue,
    neg1_ledger,
    twoform_grid_oracle,
)

T3 = FourierTorus(3, 3)


def test_dd_vanishes_and_adjointness():
    rng = np.random.default_rng(0)
    for p in range(3):
        a = T3.random_form(rng, p)
        assert T3.norm(T3.ext_d(T3.ext_d(a, p), p + 1)) < 1e-12
        b = T3.random_form(rng, p + 1)
        lhs = T3.inner(T3.ext_d(a, p), b)
        rhs = T3.inner(a, T3.codiff(b, p + 1))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_star_involution():
    rng = np.random.default_rng(1)
    for p in range(4):
        a = T3.random_form(rng, p)
        assert np.allclose(T3.star(T3.star(a, p), 3 - p), a)


def test_codiff_conventions_on_t3():
    rng = np.random.default_rng(2)
    for p in (1, 2, 3):
        a = T3.random_form(rng, p)
        assert np.allclose(codiff_by_convention(T3, a, p, "adjoint"), T3.codiff(a, p))
    assert (adjoint_sign(3, 1), adjoint_sign(3, 2), adjoint_sign(4, 1), adjoint_sign(4, 2)) == (-1, 1, -1, -1)
    with pytest.raises(ValueError):
        codiff_by_convention(T3, T3.random_form(rng, 1), 1, "other")


def test_grid_round_trip():
    link = FourierTorus(2, 2)
    eta = np.zeros((link.num_modes, 1), complex)
    eta[link.mode_index((1, 0)), 0] = 0.5
    eta[link.mode_index((-1, 0)), 0] = 0.5
    vals = link.to_grid(eta, 5)[..., 0]
    th = 2 * np.pi * np.arange(5) / 5
    assert np.allclose(vals, np.cos(th)[:, None] * np.ones(5))
    with pytest.raises(ValueError):
        link.to_grid(eta, 4)


@pytest.mark.parametrize("lam,n,expected", [(-2.0, 6, -3.0), (-1.0, 4, 0.0), (-1.5, 5, -1.25)])
def test_hodge_eigenvalue_of_homogeneity(lam, n, expected):
    assert hodge_eigenvalue_of_homogeneity(lam, n) == pytest.approx(expected)


@settings(max_examples=40)
@given(st.floats(0.0, 50.0), st.integers(3, 9))
def test_homogeneity_inverse(mu, n):
    lam = homogeneity_for_eigenvalue(mu, n)
    assert hodge_eigenvalue_of_homogeneity(lam, n) == pytest.approx(mu, abs=1e-9)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("k", [(1,), (1, 1), (2, -1), (0, 1, 1)])
def test_eigenmode_is_closed_and_coclosed(d, k):
    if len(k) > d:
        k = k[:d]
    k = tuple(k) + (0,) * (d - len(k))
    link = FourierTorus(d, 2)
    alpha = eigenmode_solution(link, k, phase=0.3)
    assert max(fhn_residuals(alpha)) < 1e-12
    dres, dlres = cone_oneform_residuals(alpha)
    assert dres < 1e-8 and dlres < 1e-8
    # the function part is a Laplace eigenfunction with eigenvalue (lam+1)(lam+n-1)
    lap = link.laplacian(alpha.eta, 0)
    mu = hodge_eigenvalue_of_homogeneity(alpha.lam, d + 1)
    assert link.norm(lap - mu * alpha.eta) < 1e-10 * link.norm(alpha.eta)


def test_perturbed_form_fails_both_checks():
    link = FourierTorus(3, 2)
    alpha = eigenmode_solution(link, (1, 1, 0))
    rng = np.random.default_rng(0)
    bad = HomogeneousOneForm(link, alpha.lam, alpha.eta, alpha.omega + 0.1 * link.random_form(rng, 1))
    assert max(fhn_residuals(bad)) > 1e-3
    assert max(cone_oneform_residuals(bad)) > 1e-3


def test_hodge_psd():
    assert hodge_psd_check(T3, 1).min_eigenvalue == pytest.approx(0.0, abs=1e-12)
    assert hodge_psd_check(T3, 1).kernel_dim == 3
    assert hodge_psd_check(T3, 1).spectral_gap == pytest.approx(1.0)
    s1 = hodge_psd_check(SphereS1(), 1)
    assert s1.kernel_dim == 1
    assert hodge_psd_check(T3, 1, shift=1.0).min_eigenvalue == pytest.approx(1.0)


@pytest.mark.parametrize("d", range(1, 6))
def test_hodge_psd_all_degrees(d):
    link = FourierTorus(d, 2)
    for p in range(d + 1):
        chk = hodge_psd_check(link, p)
        assert chk.min_eigenvalue >= -1e-10
        assert chk.kernel_dim == math.comb(d, p)


def test_hodge_spectrum_functions():
    w = hodge_spectrum(FourierTorus(2, 2), 0)
    expected = sorted(float(a * a + b * b) for a in range(-2, 3) for b in range(-2, 3))
    assert np.allclose(w, expected)


@pytest.mark.parametrize("n,verdict", [(4, "WitnessFound"), (5, "NoneExists"), (6, "NoneExists"), (8, "NoneExists")])
def test_obstruction_t3(n, verdict):
    rep = critical_oneform_obstruction(T3, n)
    assert rep.verdict == verdict
    if n == 4:
        assert len(rep.witness_modes) == 3
        assert all(m["k"] == [0, 0, 0] for m in rep.witness_modes)
        assert max(rep.witness_residuals) < 1e-12


def test_obstruction_rejects_small_n():
    with pytest.raises(UnsupportedOperation):
        critical_oneform_obstruction(SphereS1(), 3)


def test_twoform_d_examples():
    rng = np.random.default_rng(3)
    link = FourierTorus(3, 2)
    eta = link.random_form(rng, 1)
    # omega = d eta makes alpha closed
    alpha = HomogeneousTwoForm(link, eta, link.ext_d(eta, 1))
    pieces = cone_d_2form(alpha)
    assert link.norm(-pieces["d_eta"] + pieces["omega"]) < 1e-12
    assert link.norm(pieces["d_omega"]) < 1e-12
    # eta = 0 with closed omega != 0 is not closed
    closed = HomogeneousTwoForm(link, 0 * eta, link.ext_d(eta, 1))
    assert link.norm(cone_d_2form(closed)["omega"]) > 0.1


@pytest.mark.parametrize("seed", range(3))
def test_twoform_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    link = FourierTorus(3, 2)
    alpha = HomogeneousTwoForm(link, link.random_form(rng, 1), link.random_form(rng, 2))
    res = twoform_grid_oracle(alpha)
    assert res["d_mismatch"] < 1e-8 and res["star_mismatch"] < 1e-8


def test_beltrami_witness():
    eta = beltrami_field(T3, -1)
    assert T3.norm(curl(T3, eta) + eta) < 1e-12
    alpha = HomogeneousTwoForm(T3, eta, T3.ext_d(eta, 1))
    assert asd_closed_reduction(alpha)["valid"]
    # flipping the sign gives a self-dual candidate, which fails the reduction
    plus = beltrami_field(T3, 1)
    assert not asd_closed_reduction(HomogeneousTwoForm(T3, plus, T3.ext_d(plus, 1)))["valid"]


def test_harmonic_eta_not_witness():
    eta = np.zeros((T3.num_modes, 3), complex)
    eta[T3.mode_index((0, 0, 0)), 0] = 1.0
    assert not asd_closed_reduction(HomogeneousTwoForm(T3, eta, 0 * eta))["valid"]
    zero = HomogeneousTwoForm(T3, 0 * eta, 0 * eta)
    assert asd_closed_reduction(zero)["valid"]


def test_curl_spectrum():
    w, k = curl_spectrum(T3)
    assert np.allclose(np.abs(w), k, atol=1e-10)
    assert np.min(np.abs(w)) == pytest.approx(1.0)
    assert np.any(np.isclose(w, -1.0))


def test_neg1_ledger():
    led = neg1_ledger(T3)
    assert led["direct_laplacian_over_eta"] == pytest.approx(1.0, abs=1e-12)
    assert led["convention_table"]["uniform"]["chain_over_eta"] == pytest.approx(-1.0, abs=1e-12)
    assert led["convention_table"]["adjoint"]["chain_over_eta"] == pytest.approx(1.0, abs=1e-12)
    assert led["convention_table"]["adjoint"]["adjointness_consistent"]
    assert not led["convention_table"]["uniform"]["adjointness_consistent"]
    zero = neg1_ledger(T3, eta=np.zeros((T3.num_modes, 3)))
    assert zero["vacuous"] and zero["direct_laplacian_over_eta"] is None


def test_torus_dimension_bounds():
    with pytest.raises(ValueError):
        FourierTorus(8, 1)
    with pytest.raises(ValueError):
        FourierTorus(3, 0)
