import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conestab.links import HopfGraphLink, ProductOfSpheres, RoundSphere, UnsupportedLink
from conestab.spectral import (
    Verdict,
    classify,
    d0,
    exact_mu1,
    gamma,
    harmonic_dim,
    lawson_sweep,
    radial_eigs,
    radial_weighted_inner,
    richardson_order,
    scalar_link_spectrum,
    stability_quotient,
    truncated_cone_lambda1,
    verdict_for,
)


def test_gamma_examples():
    assert gamma(4, math.exp(-math.pi)) == pytest.approx(2.0)
    vals = [gamma(2, 0.3, i) for i in range(1, 50)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert gamma(7, 1e-300) == pytest.approx(25 / 4, rel=1e-5)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.5, 2.0])
def test_gamma_rejects_bad_eps(eps):
    with pytest.raises(ValueError):
        gamma(4, eps)


@pytest.mark.parametrize("n,mu,expected", [(7, -6, Fraction(1, 4)), (6, -5, Fraction(-1)), (8, -7, Fraction(2)), (3, -2, Fraction(-7, 4))])
def test_d0_exact(n, mu, expected):
    assert d0(n, Fraction(mu)) == expected


@settings(max_examples=30)
@given(st.integers(2, 40))
def test_d0_boundary(n):
    assert d0(n, -Fraction((n - 2) ** 2, 4)) == 0
    assert verdict_for(0.0) is Verdict.STABLE_NOT_STRICTLY


def test_verdicts():
    assert verdict_for(0.25) is Verdict.STRICTLY_STABLE
    assert verdict_for(-1.0) is Verdict.NOT_STABLE
    assert verdict_for(1e-12, tol=1e-9) is Verdict.STABLE_NOT_STRICTLY


@pytest.mark.parametrize("n", [3, 4, 7])
@pytest.mark.parametrize("eps", [math.exp(-math.pi), math.exp(-2.0)])
def test_radial_first_eigenvalue(n, eps):
    prob = radial_eigs(n, eps, 256)
    assert prob.rel_err[0] < 1e-2
    assert 1.8 < richardson_order(n, eps) < 2.2


def test_radial_eigenfunctions_weighted_orthonormal():
    prob = radial_eigs(5, math.exp(-2.0), 128, count=3)
    gram = np.array([[radial_weighted_inner(prob, prob.eigenfunctions[:, i], prob.eigenfunctions[:, j]) for j in range(3)] for i in range(3)])
    assert np.allclose(gram, np.eye(3), atol=1e-10)


def test_radial_grid_floor():
    with pytest.raises(ValueError):
        radial_eigs(4, 0.1, 8)


@pytest.mark.parametrize("j,k,dim", [(0, 2, 1), (1, 2, 3), (2, 2, 5), (1, 3, 4), (2, 3, 9)])
def test_harmonic_dims(j, k, dim):
    assert harmonic_dim(j, k) == dim


@pytest.mark.parametrize("k,l", [(1, 1), (3, 3), (2, 5)])
def test_lawson_link_spectrum(k, l):
    spec = ProductOfSpheres(k, l)
    spectrum = scalar_link_spectrum(spec)
    n = k + l + 1
    assert spectrum.mu1 == pytest.approx(1 - n)
    assert spectrum.multiplicities[0] == 1
    assert spectrum.curvature_sq == pytest.approx(n - 1)
    # next level: degree-one harmonics on either factor have eigenvalue -(n-1) + (n-1) = 0
    assert spectrum.eigenvalues[1] == pytest.approx(0.0, abs=1e-9)
    assert spectrum.multiplicities[1] == (k + 1) + (l + 1)
    assert exact_mu1(spec) == Fraction(1 - n)


def test_round_sphere_spectrum_and_unsupported():
    assert scalar_link_spectrum(RoundSphere(3, 5)).mu1 == 0.0
    with pytest.raises(UnsupportedLink):
        scalar_link_spectrum(HopfGraphLink())


@pytest.mark.parametrize(
    "spec,d,verdict",
    [
        (ProductOfSpheres(3, 3), 0.25, Verdict.STRICTLY_STABLE),
        (ProductOfSpheres(1, 1), -1.75, Verdict.NOT_STABLE),
        (RoundSphere(3, 5), 1.0, Verdict.STRICTLY_STABLE),
    ],
)
def test_classify(spec, d, verdict):
    rep = classify(spec, grid=128)
    assert rep.d0 == pytest.approx(d)
    assert rep.verdict is verdict
    assert rep.residuals["max_lambda1_rel_err"] < 1e-2
    doc = rep.to_json()
    assert doc["verdict"] == verdict.value and isinstance(doc["d0"], float)


def test_lawson_sweep_rows():
    rows = lawson_sweep(range(2, 11))
    for row in rows:
        n = row["n"]
        assert row["d0"] == Fraction(n * n - 8 * n + 8, 4)
        assert (row["verdict"] == "StrictlyStable") == (n >= 7)
        assert row["k"] + row["l"] == n - 1
    assert len(lawson_sweep([5])) == 3
    assert lawson_sweep([]) == []
    with pytest.raises(ValueError):
        lawson_sweep([13])


def test_direct_clifford_cone():
    lam = truncated_cone_lambda1(ProductOfSpheres(1, 1), math.exp(-math.pi), grid=(48, 12))
    assert lam == pytest.approx(gamma(3, math.exp(-math.pi)) - 2, rel=2e-2)


def test_direct_round_sphere_reduces_to_radial():
    lam = truncated_cone_lambda1(RoundSphere(2, 4), 0.1, grid=(128, 8))
    assert lam == pytest.approx(gamma(3, 0.1), rel=1e-3)
    with pytest.raises(UnsupportedLink):
        truncated_cone_lambda1(ProductOfSpheres(2, 2), 0.1)


def test_quotient_of_radial_eigenmode():
    eps = math.exp(-2.0)
    L = -math.log(eps)
    # psi = r^{-(n-2)/2} sin(pi (t - log eps)/L) is the first radial Dirichlet mode
    n = 7
    psi = lambda r: r ** (-(n - 2) / 2) * np.sin(math.pi * (np.log(r) - math.log(eps)) / L)
    q = stability_quotient(ProductOfSpheres(3, 3), {0: psi}, eps, samples=20001)
    assert q == pytest.approx(gamma(n, eps) - 6, rel=1e-6)


def test_quotient_rejects_zero():
    with pytest.raises(ValueError):
        stability_quotient(ProductOfSpheres(3, 3), {0: lambda r: 0 * r}, 0.1)
