"""Calibration forms and calibrated-cone tests.

Forms live on R^m with complex coordinates interleaved, so dz_j = dx^{2j} +
i dx^{2j+1} in zero-based labels. The associative 3-form uses the basis
dx^1..dx^7 with the sign convention for which the Hodge dual reproduces the
standard coassociative 4-form term by term (see the decisions ledger).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .exterior import ComplexStructure, KForm, dx, evaluate_form, hodge_star, wedge
from .links import (
    ComplexQuadricLink,
    HarveyLawsonT2Link,
    HopfGraphLink,
    LinkSpec,
    _frames_from,
)

ORTHO_TOL = 1e-8


# --- calibration specs ----------------------------------------------------------


@dataclass(frozen=True)
class KahlerPower:
    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")


@dataclass(frozen=True)
class SpecialLagrangian:
    n: int
    theta: float = 0.0


@dataclass(frozen=True)
class Associative:
    pass


@dataclass(frozen=True)
class Coassociative:
    pass


CalibrationSpec = KahlerPower | SpecialLagrangian | Associative | Coassociative


def kahler_form(n: int) -> KForm:
    return ComplexStructure(n).kahler_form()


def holomorphic_volume(n: int) -> tuple[KForm, KForm]:
    """Real and imaginary parts of dz_1 ^ ... ^ dz_n."""
    re_terms, im_terms = [], []
    for choice in product((0, 1), repeat=n):
        idx = tuple(2 * j + c for j, c in enumerate(choice))
        coeff = 1j ** sum(choice)
        if abs(coeff.real) > 0.5:
            re_terms.append((idx, round(coeff.real)))
        else:
            im_terms.append((idx, round(coeff.imag)))
    return KForm.from_terms(2 * n, n, re_terms), KForm.from_terms(2 * n, n, im_terms)


def omega0() -> KForm:
    """Associative 3-form on R^7."""
    d = lambda *i: dx(7, *i)
    return (
        d(5, 6, 7)
        + (d(5) ^ (d(1, 2) - d(3, 4)))
        + (d(6) ^ (d(1, 3) + d(2, 4)))
        + (d(7) ^ (d(1, 4) - d(2, 3)))
    )


def omega0_dual_displayed() -> KForm:
    """The coassociative 4-form written out in coordinates."""
    d = lambda *i: dx(7, *i)
    return (
        d(1, 2, 3, 4)
        - (d(6, 7) ^ (d(1, 2) - d(3, 4)))
        + (d(5, 7) ^ (d(1, 3) + d(2, 4)))
        - (d(5, 6) ^ (d(1, 4) - d(2, 3)))
    )


def build_calibration(spec) -> KForm:
    if isinstance(spec, KahlerPower):
        # omega^k / k! = sum over k-subsets of the coordinate pairs, coefficient 1
        terms = [
            (tuple(i for j in subset for i in (2 * j, 2 * j + 1)), 1.0)
            for subset in combinations(range(spec.n), spec.k)
        ]
        return KForm.from_terms(2 * spec.n, 2 * spec.k, terms)
    if isinstance(spec, SpecialLagrangian):
        re, im = holomorphic_volume(spec.n)
        c, s = math.cos(spec.theta), math.sin(spec.theta)
        # Re(e^{-i theta} (Re + i Im)) = cos Re + sin Im
        out = KForm.zero(2 * spec.n, spec.n)
        if abs(c) > 1e-15:
            out = out + c * re
        if abs(s) > 1e-15:
            out = out + s * im
        return out
    if isinstance(spec, Associative):
        return omega0()
    if isinstance(spec, Coassociative):
        return hodge_star(omega0())
    raise TypeError(f"unknown calibration spec {spec!r}")


def spec_from_json(doc: dict):
    kind = doc.get("type")
    if kind == "KahlerPower":
        return KahlerPower(int(doc["n"]), int(doc["k"]))
    if kind == "SpecialLagrangian":
        return SpecialLagrangian(int(doc["n"]), float(doc.get("theta", 0.0)))
    if kind == "Associative":
        return Associative()
    if kind == "Coassociative":
        return Coassociative()
    raise ValueError(f"unknown calibration type {kind!r}")


def spec_to_json(spec) -> dict:
    return {"type": type(spec).__name__, **spec.__dict__}


# --- comass -------------------------------------------------------------------


def random_frames(rng, m: int, k: int, count: int) -> np.ndarray:
    """Orthonormal k-frames in R^m from QR of Gaussian samples."""
    g = rng.standard_normal((count, m, k))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]


def form_gradient(form: KForm, frame: np.ndarray) -> np.ndarray:
    """d form(frame) / d frame, using linearity in each column."""
    m, k = form.dim, form.degree
    grad = np.zeros_like(frame)
    eye = np.eye(m)
    for j in range(k):
        f = np.repeat(frame[..., None, :, :], m, axis=-3)  # (..., m, m, k)
        f[..., :, :, j] = eye
        grad[..., :, j] = evaluate_form(form, f)
    return grad


def _ascend(form: KForm, frames: np.ndarray, steps: int, step: float = 0.2) -> np.ndarray:
    vals = evaluate_form(form, frames)
    sign = np.where(vals < 0, -1.0, 1.0)
    # work with |form| by flipping the first column where needed
    frames = frames.copy()
    frames[..., 0] *= sign[..., None]
    for _ in range(steps):
        g = form_gradient(form, frames)
        q, r = np.linalg.qr(frames + step * g)
        frames = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[..., None, :]
    return frames


@dataclass
class ComassEstimate:
    sampled_max: float
    ascended_max: float
    trials: int
    seed: int

    @property
    def value(self) -> float:
        return max(self.sampled_max, self.ascended_max)


def comass_sample(form: KForm, trials: int = 100_000, seed: int = 0, ascent_starts: int = 16, ascent_steps: int = 200) -> ComassEstimate:
    """Lower bound on the comass: random orthonormal frames plus Stiefel ascent."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    best = -np.inf
    top: list[tuple[float, np.ndarray]] = []
    chunk = 20_000
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        fr = random_frames(rng, form.dim, form.degree, c)
        vals = np.abs(evaluate_form(form, fr))
        best = max(best, float(vals.max()))
        keep = np.argsort(vals)[-ascent_starts:]
        top.extend((float(vals[i]), fr[i]) for i in keep)
        done += c
    top.sort(key=lambda p: -p[0])
    starts = np.stack([f for _, f in top[:ascent_starts]])
    asc = _ascend(form, starts, ascent_steps)
    ascended = float(np.max(np.abs(evaluate_form(form, asc))))
    return ComassEstimate(best, ascended, trials, seed)


# --- calibrated tests -----------------------------------------------------------


def check_orthonormal(frame: np.ndarray) -> np.ndarray:
    """Return an orthonormal frame, re-orthonormalizing small defects once."""
    frame = np.asarray(frame, dtype=float)
    k = frame.shape[-1]
    gram = np.swapaxes(frame, -1, -2) @ frame
    err = np.max(np.abs(gram - np.eye(k)))
    if err <= ORTHO_TOL:
        return frame
    # polar factor keeps the span and the orientation
    u, _, vt = np.linalg.svd(frame, full_matrices=False)
    fixed = u @ vt
    gram = np.swapaxes(fixed, -1, -2) @ fixed
    if err > 1e-3 or np.max(np.abs(gram - np.eye(k))) > ORTHO_TOL:
        raise ValueError(f"frame is not orthonormal (defect {err:.2e})")
    return fixed


def is_calibrated_at(form: KForm, frame, orientation: int = 1) -> np.ndarray:
    """|form(frame) - 1| with the first frame vector multiplied by ``orientation``."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    frame = check_orthonormal(frame)
    return np.abs(orientation * evaluate_form(form, frame) - 1.0)


def coassociative_residual(frame) -> np.ndarray:
    frame = check_orthonormal(frame)
    if frame.shape[-2:] != (7, 4):
        raise ValueError("expected 4 tangent vectors in R^7")
    w = omega0()
    triples = [frame[..., list(t)] for t in combinations(range(4), 3)]
    return np.max(np.abs(np.stack([evaluate_form(w, t) for t in triples], axis=-1)), axis=-1)


def special_lagrangian_residual(frame, theta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """(max |omega(t_i, t_j)|, |Im(e^{-i theta} Omega)(frame)|)."""
    frame = check_orthonormal(frame)
    m, n = frame.shape[-2:]
    if m != 2 * n:
        raise ValueError("expected n tangent vectors in R^{2n}")
    w = kahler_form(n)
    pairs = [evaluate_form(w, frame[..., [i, j]]) for i, j in combinations(range(n), 2)]
    lag = np.max(np.abs(np.stack(pairs, axis=-1)), axis=-1)
    phase = holomorphic_phase(frame)
    im = np.abs(np.imag(np.exp(-1j * theta) * phase))
    return lag, im


def holomorphic_phase(frame) -> np.ndarray:
    """Omega(frame) as a complex number."""
    n = frame.shape[-1]
    re, im = holomorphic_volume(n)
    return evaluate_form(re, frame) + 1j * evaluate_form(im, frame)


def detect_sl_angle(frame) -> float:
    """Phase theta with Omega(frame) = e^{i theta} on an SL frame."""
    return float(np.angle(np.mean(holomorphic_phase(frame))))


# --- anti-self-dual map -----------------------------------------------------------


def asd_form_of_normal(v, tangent: np.ndarray) -> KForm:
    """(iota_V omega0) restricted to a coassociative 4-plane, in the tangent coframe."""
    v = np.asarray(v, dtype=float)
    tangent = check_orthonormal(tangent)
    if tangent.shape != (7, 4):
        raise ValueError("expected a single 4-frame in R^7")
    if np.max(np.abs(tangent.T @ v)) > 1e-8 * max(1.0, np.linalg.norm(v)):
        raise ValueError("V is not normal to the tangent plane")
    w = omega0()
    terms = []
    for i, j in combinations(range(4), 2):
        val = evaluate_form(w, np.column_stack([v, tangent[:, i], tangent[:, j]]))
        if val != 0:
            terms.append(((i, j), float(val)))
    return KForm.from_terms(4, 2, terms)


def two_form_norm_sq(a: KForm) -> float:
    return float(sum(c * c for c in a.coeffs.values()))


def asd_residual(a: KForm, orientation: int = 1) -> float:
    diff = hodge_star(a, orientation) + a
    return max((abs(c) for c in diff.coeffs.values()), default=0.0)


# --- catalog cones ---------------------------------------------------------------


CONE_CATALOG = {
    "lawson-osserman": (HopfGraphLink(), Coassociative()),
    "harvey-lawson-t2": (HarveyLawsonT2Link(), SpecialLagrangian(3, 0.0)),
    "complex-quadric": (ComplexQuadricLink(), KahlerPower(3, 2)),
}


def cone_frames(spec: LinkSpec, coords, chart: int = 0) -> np.ndarray:
    """Oriented orthonormal cone tangent frames (sigma, E_1, ..., E_{n-1})."""
    x, jac, _ = spec.chart(coords, chart)
    fr = _frames_from(spec, x, jac)
    return np.concatenate([x[..., None], fr.tangent], axis=-1)


def cone_normals(spec: LinkSpec, coords, chart: int = 0) -> tuple[np.ndarray, np.ndarray]:
    x, jac, _ = spec.chart(coords, chart)
    fr = _frames_from(spec, x, jac)
    return np.concatenate([x[..., None], fr.tangent], axis=-1), fr.normal


@dataclass
class CalibratedTestReport:
    cone: str
    form: dict
    samples: int
    max_restriction_residual: float
    max_value_residual: float
    orientation_sign: int
    seed: int
    tol: float = 1e-8
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_restriction_residual <= self.tol and self.max_value_residual <= self.tol

    def to_json(self) -> dict:
        return {
            "cone": self.cone,
            "form": self.form,
            "samples": self.samples,
            "max_restriction_residual": self.max_restriction_residual,
            "max_value_residual": self.max_value_residual,
            "orientation_sign": self.orientation_sign,
            "seed": self.seed,
            "tol": self.tol,
            "passed": self.passed,
            **self.extras,
        }


def _restriction_residual(spec, frames) -> np.ndarray:
    if isinstance(spec, Coassociative):
        return coassociative_residual(frames)
    if isinstance(spec, SpecialLagrangian):
        return special_lagrangian_residual(frames, spec.theta)[0]
    if isinstance(spec, KahlerPower):
        # J-invariance of the tangent plane: |(1 - P) J P|
        J = ComplexStructure(spec.n).matrix
        p = frames @ np.swapaxes(frames, -1, -2)
        defect = (np.eye(2 * spec.n) - p) @ J @ frames
        return np.max(np.abs(defect), axis=(-2, -1))
    return np.zeros(frames.shape[:-2])


def calibration_test(cone: str, form_spec=None, samples: int = 1000, seed: int = 0, tol: float = 1e-8, chart: int = 0) -> CalibratedTestReport:
    """Check a catalog cone against a calibration at random link points.

    The orientation sign is fixed once from the first sample; for special
    Lagrangian forms the phase is detected and the form re-rotated to it.
    """
    if cone not in CONE_CATALOG:
        raise KeyError(f"unknown cone {cone!r}; known: {sorted(CONE_CATALOG)}")
    link, default_form = CONE_CATALOG[cone]
    form_spec = default_form if form_spec is None else form_spec
    form = build_calibration(form_spec)
    if form.dim != link.ambient_dim or form.degree != link.cone_dim:
        return CalibratedTestReport(
            cone, spec_to_json(form_spec), 0, math.inf, math.inf, 0, seed, tol,
            {"reason": f"form of degree {form.degree} on R^{form.dim} does not match a {link.cone_dim}-dim cone in R^{link.ambient_dim}"},
        )
    rng = np.random.default_rng(seed)
    coords = link.sample_coords(rng, samples, chart)
    frames = cone_frames(link, coords, chart)
    extras: dict = {"chart": chart}
    if isinstance(form_spec, SpecialLagrangian):
        theta = detect_sl_angle(frames[:1])
        extras["detected_theta"] = theta
        extras["requested_theta"] = form_spec.theta
        form_spec = SpecialLagrangian(form_spec.n, theta)
        form = build_calibration(form_spec)
        lag, im = special_lagrangian_residual(frames, theta)
        restriction = np.maximum(lag, im)
    else:
        restriction = _restriction_residual(form_spec, frames)
    vals = evaluate_form(form, frames)
    orient = 1 if vals[0] >= 0 else -1
    value_res = np.abs(orient * vals - 1.0)
    return CalibratedTestReport(
        cone,
        spec_to_json(form_spec),
        samples,
        float(np.max(restriction)),
        float(np.max(value_res)),
        orient,
        seed,
        tol,
        extras,
    )


def asd_isometry_report(samples: int = 100, seed: int = 0) -> dict:
    """ASD residuals of V -> (iota_V omega0)|_M on the Lawson-Osserman cone.

    The ratio |alpha_V|^2 / |V|^2 is measured; a constant ratio means the
    map is an isometry up to that factor.
    """
    link = HopfGraphLink()
    rng = np.random.default_rng(seed)
    coords = link.sample_coords(rng, samples)
    frames, normals = cone_normals(link, coords)
    star = hodge_star(omega0())
    orient = 1 if evaluate_form(star, frames[0]) >= 0 else -1
    asd, ratios = [], []
    for fr, nrm in zip(frames, normals):
        v = nrm @ rng.standard_normal(nrm.shape[-1])
        a = asd_form_of_normal(v, fr)
        asd.append(asd_residual(a, orient))
        ratios.append(two_form_norm_sq(a) / float(v @ v))
    ratios = np.array(ratios)
    return {
        "samples": samples,
        "max_asd_residual": float(max(asd)),
        "isometry_constant": float(np.mean(ratios)),
        "isometry_spread": float(np.ptp(ratios)),
        "orientation_sign": orient,
        "seed": seed,
    }
