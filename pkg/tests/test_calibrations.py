import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conestab.calibrations import (
    Associative,
    Coassociative,
    KahlerPower,
    SpecialLagrangian,
    asd_form_of_normal,
    asd_isometry_report,
    build_calibration,
    calibration_test,
    check_orthonormal,
    coassociative_residual,
    comass_sample,
    cone_normals,
    detect_sl_angle,
    is_calibrated_at,
    omega0,
    random_frames,
    spec_from_json,
    spec_to_json,
    special_lagrangian_residual,
)
from conestab.exterior import ComplexStructure, dx, evaluate_form
from conestab.links import HopfGraphLink


def test_kahler_and_sl_coefficients():
    assert build_calibration(KahlerPower(2, 1)).is_close(dx(4, 1, 2) + dx(4, 3, 4))
    # interleaved (x1, y1, x2, y2): Re(dz1 ^ dz2) = dx1 dx2 - dy1 dy2
    assert build_calibration(SpecialLagrangian(2, 0.0)).is_close(dx(4, 1, 3) - dx(4, 2, 4))
    assert len(build_calibration(Associative()).coeffs) == 7
    assert len(build_calibration(Coassociative()).coeffs) == 7


def test_kahler_power_is_power_over_factorial():
    w = ComplexStructure(3).kahler_form()
    assert build_calibration(KahlerPower(3, 2)).is_close((w ^ w) / 2)
    assert build_calibration(KahlerPower(3, 3)).is_close((w ^ w ^ w) / 6)


def test_spec_json_roundtrip():
    for spec in (KahlerPower(3, 2), SpecialLagrangian(3, 0.5), Associative(), Coassociative()):
        assert spec_from_json(spec_to_json(spec)) == spec
    with pytest.raises(ValueError):
        KahlerPower(2, 3)


@pytest.mark.parametrize("spec", [Associative(), Coassociative(), KahlerPower(3, 2), SpecialLagrangian(3, 0.0)], ids=repr)
def test_comass_sample(spec):
    est = comass_sample(build_calibration(spec), trials=5000, seed=1, ascent_starts=4, ascent_steps=150)
    assert est.value <= 1 + 1e-9
    assert est.ascended_max > 0.999


def test_comass_unit_form():
    assert comass_sample(dx(5, 2, 4), trials=10).value <= 1 + 1e-12
    assert evaluate_form(dx(5, 2, 4), np.eye(5)[:, [1, 3]]) == 1.0


def test_wirtinger_complex_planes():
    rng = np.random.default_rng(0)
    J = ComplexStructure(3).matrix
    form = build_calibration(KahlerPower(3, 1))
    for _ in range(10):
        u = rng.standard_normal(6)
        u /= np.linalg.norm(u)
        assert is_calibrated_at(form, np.column_stack([u, J @ u])) < 1e-12


def test_coassociative_examples():
    e = np.eye(7)
    assert coassociative_residual(e[:, :4]) == 0.0
    assert coassociative_residual(e[:, [4, 5, 6, 0]]) == pytest.approx(1.0)


def test_sl_examples():
    e = np.eye(6)
    lag, im = special_lagrangian_residual(e[:, [0, 2, 4]])
    assert lag == 0.0 and im == 0.0
    lag, _ = special_lagrangian_residual(np.eye(4)[:, [0, 1]])
    assert lag == pytest.approx(1.0)


def test_rotated_sl_plane_angle():
    # e^{i theta/3} R^3 has holomorphic phase theta
    theta = 0.7
    z = np.exp(1j * theta / 3) * np.eye(3)
    frame = np.empty((6, 3))
    frame[0::2], frame[1::2] = z.real, z.imag
    assert detect_sl_angle(frame[None]) == pytest.approx(theta)
    lag, im = special_lagrangian_residual(frame, theta)
    assert lag < 1e-15 and im < 1e-15


def test_orthonormality_guard():
    f = np.eye(7)[:, :4]
    assert check_orthonormal(f + 1e-6 * np.random.default_rng(0).standard_normal((7, 4))).shape == (7, 4)
    with pytest.raises(ValueError):
        check_orthonormal(2 * f)


@pytest.mark.parametrize(
    "cone,chart",
    [("lawson-osserman", 0), ("lawson-osserman", 1), ("harvey-lawson-t2", 0), ("complex-quadric", 0), ("complex-quadric", 1)],
)
def test_catalog_cones_calibrated(cone, chart):
    rep = calibration_test(cone, samples=300, seed=chart, chart=chart)
    assert rep.passed, rep.to_json()


def test_harvey_lawson_phase_is_pi():
    rep = calibration_test("harvey-lawson-t2", samples=50)
    assert abs(abs(rep.extras["detected_theta"]) - math.pi) < 1e-12


def test_wrong_calibration_flagged():
    rep = calibration_test("lawson-osserman", KahlerPower(2, 1), samples=10)
    assert not rep.passed
    assert "reason" in rep.to_json()
    with pytest.raises(KeyError):
        calibration_test("nope")


def test_associative_form_on_lo_cone_fails():
    # degree 3 on a 4-cone: mismatch, not a silent pass
    assert not calibration_test("lawson-osserman", Associative(), samples=5).passed


def test_asd_map_on_lo_cone():
    rep = asd_isometry_report(samples=50, seed=3)
    assert rep["max_asd_residual"] < 1e-8
    assert rep["isometry_constant"] == pytest.approx(2.0, abs=1e-10)
    assert rep["isometry_spread"] < 1e-10


def test_asd_map_linear_and_zero():
    link = HopfGraphLink()
    rng = np.random.default_rng(0)
    frames, normals = cone_normals(link, link.sample_coords(rng, 1))
    fr, nrm = frames[0], normals[0]
    v, w = nrm @ rng.standard_normal(3), nrm @ rng.standard_normal(3)
    assert asd_form_of_normal(np.zeros(7), fr).coeffs == {}
    lhs = asd_form_of_normal(v + w, fr)
    assert lhs.is_close(asd_form_of_normal(v, fr) + asd_form_of_normal(w, fr), tol=1e-12)
    with pytest.raises(ValueError):
        asd_form_of_normal(fr[:, 0], fr)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_random_frames_orthonormal(seed):
    fr = random_frames(np.random.default_rng(seed), 7, 3, 4)
    assert np.allclose(np.swapaxes(fr, -1, -2) @ fr, np.eye(3), atol=1e-12)
    assert np.all(np.abs(evaluate_form(omega0(), fr)) <= 1 + 1e-12)
