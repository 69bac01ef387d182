from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conestab.calibrations import omega0, omega0_dual_displayed
from conestab.exterior import (
    ComplexStructure,
    KForm,
    dx,
    evaluate_form,
    flat,
    hodge_star,
    interior_product,
    permutation_sign,
    sharp,
    to_complex,
    to_real,
    wedge,
)


def brute_force_evaluate(form: KForm, vectors: np.ndarray) -> float:
    """Alternating sum over permutations, independent of the determinant path."""
    k = form.degree
    total = 0.0
    for idx, c in form.coeffs.items():
        for perm in permutations(range(k)):
            term = permutation_sign(perm)
            for slot, p in enumerate(perm):
                term *= vectors[idx[slot], p]
            total += c * term
    return total


def test_wedge_basics():
    assert wedge(dx(4, 1), dx(4, 2)).coeffs == {(0, 1): 1.0}
    assert wedge(dx(4, 2), dx(4, 1)).coeffs == {(0, 1): -1.0}
    assert wedge(dx(4, 1), dx(4, 1)).coeffs == {}


def test_kahler_square_is_volume():
    w = ComplexStructure(2).kahler_form()
    assert (wedge(w, w) / 2).is_close(dx(4, 1, 2, 3, 4))


def test_wedge_degree_overflow():
    with pytest.raises(ValueError):
        wedge(dx(3, 1, 2), dx(3, 1, 3))


def test_star_of_omega0_matches_display():
    assert hodge_star(omega0()).is_close(omega0_dual_displayed(), tol=0)


@pytest.mark.parametrize(
    "form,expected",
    [
        (dx(2, 1), dx(2, 2)),
        (dx(7, 1, 2), dx(7, 3, 4, 5, 6, 7)),
        (dx(3, 2), -dx(3, 1, 3)),
        (dx(4, 1, 3), -dx(4, 2, 4)),
    ],
)
def test_hodge_star_examples(form, expected):
    assert hodge_star(form).is_close(expected)


@pytest.mark.parametrize("m,p", [(3, 1), (4, 2), (5, 2), (7, 3)])
def test_star_star_sign(m, p):
    rng = np.random.default_rng(m * 10 + p)
    from itertools import combinations

    a = KForm.from_terms(m, p, [(c, rng.standard_normal()) for c in combinations(range(m), p)])
    assert hodge_star(hodge_star(a)).is_close(a * (-1) ** (p * (m - p)))
    assert hodge_star(hodge_star(a, -1), -1).is_close(hodge_star(hodge_star(a)))


def test_interior_examples():
    e5 = np.eye(7)[4]
    assert interior_product(e5, dx(7, 5, 6, 7)).is_close(dx(7, 6, 7))
    assert interior_product(e5, omega0()).is_close(dx(7, 6, 7) + dx(7, 1, 2) - dx(7, 3, 4))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=7, max_size=7))
def test_double_interior_vanishes(v):
    v = np.array(v)
    twice = interior_product(v, interior_product(v, omega0()))
    assert all(abs(c) < 1e-9 * (1 + np.dot(v, v)) for c in twice.coeffs.values())


def test_evaluate_examples():
    e = np.eye(7)
    assert evaluate_form(omega0(), e[:, [4, 5, 6]]) == pytest.approx(1.0)
    assert evaluate_form(omega0(), e[:, [0, 1, 2]]) == 0.0
    v = np.random.default_rng(0).standard_normal(7)
    assert abs(evaluate_form(omega0(), np.column_stack([v, v, e[:, 0]]))) < 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_evaluate_matches_permutation_sum(seed):
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((7, 3))
    assert evaluate_form(omega0(), vecs) == pytest.approx(brute_force_evaluate(omega0(), vecs), abs=1e-12)


def test_evaluate_batched():
    rng = np.random.default_rng(1)
    frames = rng.standard_normal((5, 7, 3))
    batch = evaluate_form(omega0(), frames)
    assert batch.shape == (5,)
    assert np.allclose(batch, [evaluate_form(omega0(), f) for f in frames])


def test_flat_sharp():
    assert flat([1, 0]).is_close(dx(2, 1))
    g = np.diag([4.0, 1.0])
    assert flat([1, 0], g).is_close(4 * dx(2, 1))
    rng = np.random.default_rng(3)
    b = rng.standard_normal((4, 4))
    metric = b @ b.T + 4 * np.eye(4)
    v = rng.standard_normal(4)
    assert np.allclose(sharp(flat(v, metric), metric), v)
    with pytest.raises(ValueError):
        flat([1, 0], np.diag([1.0, -1.0]))


def test_canonical_validation():
    with pytest.raises(ValueError):
        KForm(3, 2, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        KForm(3, 1, {(0,): float("nan")})
    with pytest.raises(ValueError):
        dx(3, 1) + dx(4, 1)


def test_complex_structure_layout():
    J = ComplexStructure(2)
    e = np.eye(4)
    assert np.allclose(J(e[0]), e[1])
    assert np.allclose(J(J(e[2])), -e[2])
    z = np.array([1 + 2j, -3j])
    assert np.allclose(to_complex(to_real(z)), z)
