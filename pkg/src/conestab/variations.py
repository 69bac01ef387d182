"""Second variation on minimal cones: Simons' operator, the quadratic form Q,
the Jacobi field of a complex cone and logarithmic cutoff estimates.

Cone patches are parametrized by (t, c) -> e^t sigma(c) with t = log r and c
link chart coordinates. Radial integrals use Gauss-Legendre on pieces whose
endpoints include every kink of the integrand; link integrals use a tensor
rule (Gauss-Legendre on polar angles, midpoint on periodic ones).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exterior import ComplexStructure, to_complex, to_real
from .links import ComplexQuadricLink, LinkSpec, UnsupportedLink, _frames_from, _sff_from, link_volume

GRADIENT_FLOOR = 1e-6


class SingularPoint(ValueError):
    """|df| is below the admissible floor at the requested point."""


class HypothesisViolation(ValueError):
    """df vanishes somewhere on the link."""


# --- holomorphic polynomials ------------------------------------------------------


@dataclass(frozen=True)
class HolomorphicPolynomial:
    """f(z) = sum_t c_t z^{e_t} on C^nvars; must be homogeneous."""

    exponents: tuple[tuple[int, ...], ...]
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if len(self.exponents) != len(self.coeffs) or not self.exponents:
            raise ValueError("need one coefficient per exponent tuple")
        widths = {len(e) for e in self.exponents}
        degrees = {sum(e) for e in self.exponents}
        if len(widths) != 1:
            raise ValueError("exponent tuples of unequal length")
        if len(degrees) != 1:
            raise ValueError("polynomial is not homogeneous")
        if any(min(e) < 0 for e in self.exponents):
            raise ValueError("negative exponent")

    @classmethod
    def quadric(cls, nvars: int = 3) -> "HolomorphicPolynomial":
        return cls.power_sum(nvars, 2)

    @classmethod
    def power_sum(cls, nvars: int, degree: int) -> "HolomorphicPolynomial":
        ex = tuple(tuple(degree if i == j else 0 for i in range(nvars)) for j in range(nvars))
        return cls(ex, (1.0,) * nvars)

    @classmethod
    def from_json(cls, doc: dict) -> "HolomorphicPolynomial":
        kind = doc.get("type", "quadric")
        if kind == "quadric":
            return cls.quadric(int(doc.get("nvars", 3)))
        if kind == "power_sum":
            return cls.power_sum(int(doc["nvars"]), int(doc["degree"]))
        if kind == "monomials":
            return cls(
                tuple(tuple(int(i) for i in e) for e in doc["exponents"]),
                tuple(complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in doc["coeffs"]),
            )
        raise ValueError(f"unknown polynomial type {kind!r}")

    @property
    def nvars(self) -> int:
        return len(self.exponents[0])

    @property
    def degree(self) -> int:
        return sum(self.exponents[0])

    @property
    def cone_dim(self) -> int:
        """Real dimension of f^{-1}(0)."""
        return 2 * (self.nvars - 1)

    @property
    def homogeneity(self) -> int:
        """Homogeneity of the Jacobi field |grad u|^{-2} grad u."""
        return 1 - self.degree

    def _eval(self, z, exps, coeffs):
        z = np.asarray(z, dtype=complex)
        e = np.asarray(exps)
        return np.sum(np.asarray(coeffs) * np.prod(z[..., None, :] ** e, axis=-1), axis=-1)

    def __call__(self, z) -> np.ndarray:
        return self._eval(z, self.exponents, self.coeffs)

    def _derivative(self, j):
        ex, co = [], []
        for e, c in zip(self.exponents, self.coeffs):
            if e[j] > 0:
                ex.append(tuple(ei - (i == j) for i, ei in enumerate(e)))
                co.append(c * e[j])
        return ex, co

    def grad(self, z) -> np.ndarray:
        """Complex gradient (df/dz_j)_j."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for j in range(self.nvars):
            ex, co = self._derivative(j)
            if ex:
                out[..., j] = self._eval(z, ex, co)
        return out

    def hessian(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        n = self.nvars
        out = np.zeros(z.shape + (n,), dtype=complex)
        for j in range(n):
            ex, co = self._derivative(j)
            if not ex:
                continue
            part = HolomorphicPolynomial.__new__(HolomorphicPolynomial)
            object.__setattr__(part, "exponents", tuple(ex))
            object.__setattr__(part, "coeffs", tuple(co))
            out[..., j, :] = part.grad(z)
        return out

    def to_json(self) -> dict:
        return {
            "type": "monomials",
            "exponents": [list(e) for e in self.exponents],
            "coeffs": [[complex(c).real, complex(c).imag] for c in self.coeffs],
        }


def real_gradients(f: HolomorphicPolynomial, x) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean gradients of u = Re f and v = Im f at real points (interleaved)."""
    z = to_complex(np.asarray(x, dtype=float))
    g = f.grad(z)
    gu = np.empty(np.shape(x))
    gv = np.empty(np.shape(x))
    # directional derivatives along e_x (dz = 1) and e_y (dz = i)
    gu[..., 0::2], gu[..., 1::2] = g.real, (1j * g).real
    gv[..., 0::2], gv[..., 1::2] = g.imag, (1j * g).imag
    return gu, gv


def cauchy_riemann_check(f: HolomorphicPolynomial, x) -> np.ndarray:
    """|grad v - J grad u| at real points."""
    gu, gv = real_gradients(f, x)
    J = ComplexStructure(f.nvars)
    return np.linalg.norm(gv - J(gu), axis=-1)


# --- sampling the link --------------------------------------------------------------


def retract_to_link(f: HolomorphicPolynomial, z, iters: int = 60, tol: float = 1e-13):
    """Newton steps z <- z - conj(df) f / |df|^2 alternated with normalization.

    Returns (points, converged mask).
    """
    z = np.array(z, dtype=complex)
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    for _ in range(iters):
        val = f(z)
        g = f.grad(z)
        gn = np.sum(np.abs(g) ** 2, axis=-1)
        safe = np.where(gn > 0, gn, 1.0)
        z = z - np.conj(g) * (val / safe)[..., None]
        z /= np.linalg.norm(z, axis=-1, keepdims=True)
        if np.all(np.abs(f(z)) < tol):
            break
    ok = np.abs(f(z)) < 1e-10
    return z, ok


def sample_link(f: HolomorphicPolynomial, count: int, seed: int = 0) -> np.ndarray:
    """Points of f^{-1}(0) on the unit sphere (complex coordinates)."""
    rng = np.random.default_rng(seed)
    out = []
    have = 0
    while have < count:
        z0 = rng.standard_normal((2 * count, f.nvars)) + 1j * rng.standard_normal((2 * count, f.nvars))
        z, ok = retract_to_link(f, z0)
        out.append(z[ok])
        have += int(ok.sum())
    return np.concatenate(out)[:count]


@dataclass
class SingularityProbe:
    min_gradient: float
    trials: int
    skipped: int
    argmin: np.ndarray
    seed: int

    def to_json(self) -> dict:
        return {
            "min_gradient": self.min_gradient,
            "trials": self.trials,
            "skipped": self.skipped,
            "argmin": to_real(self.argmin).tolist(),
            "seed": self.seed,
        }


def isolated_singularity_probe(
    f: HolomorphicPolynomial, trials: int = 200, seed: int = 0, descent_steps: int = 300, threshold: float = GRADIENT_FLOOR
) -> SingularityProbe:
    """Minimize |df| over sampled link points; raise if it reaches zero.

    Each seed is retracted onto the link, then pushed down |df|^2 by
    retraction-projected gradient steps.
    """
    if trials < 100:
        raise ValueError("use at least 100 trials")
    rng = np.random.default_rng(seed)
    z0 = rng.standard_normal((trials, f.nvars)) + 1j * rng.standard_normal((trials, f.nvars))
    z, ok = retract_to_link(f, z0)
    skipped = int((~ok).sum())
    z = z[ok]

    def gsq(z):
        return np.sum(np.abs(f.grad(z)) ** 2, axis=-1)

    step = np.full(len(z), 0.1)
    val = gsq(z)
    for _ in range(descent_steps):
        g = f.grad(z)
        h = f.hessian(z)
        # 2 d|df|^2 / d conj(z) = 2 conj(H) df  (H symmetric)
        direction = 2 * np.einsum("...jk,...j->...k", np.conj(h), g)
        trial, ok_t = retract_to_link(f, z - step[:, None] * direction, iters=30)
        tval = gsq(trial)
        better = ok_t & (tval < val)
        z = np.where(better[:, None], trial, z)
        val = np.where(better, tval, val)
        step = np.where(better, step * 1.5, step * 0.5)
        if np.all(step < 1e-14):
            break
    i = int(np.argmin(val))
    probe = SingularityProbe(float(math.sqrt(val[i])), trials, skipped, z[i], seed)
    if probe.min_gradient < threshold:
        raise HypothesisViolation(
            f"df vanishes on the link to within {probe.min_gradient:.3e} at {np.round(z[i], 6)}"
        )
    return probe


# --- the Jacobi field -------------------------------------------------------------


def jacobi_field_W(f: HolomorphicPolynomial, x, floor: float = GRADIENT_FLOOR) -> np.ndarray:
    """W = grad u / |grad u|^2 at real (interleaved) points of the cone.

    The floor applies to |df| / |x|^{deg-1}, so it is scale invariant.
    """
    gu, _ = real_gradients(f, x)
    n2 = np.sum(gu * gu, axis=-1, keepdims=True)
    scale = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1, keepdims=True) ** (f.degree - 1)
    if np.any(n2 < floor ** 2 * scale) or np.any(n2 == 0):
        raise SingularPoint(f"|df| below {floor:g} relative to |x|^(deg-1)")
    return gu / n2


def tangent_space(f: HolomorphicPolynomial, x) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of d(u, v) at x."""
    gu, gv = real_gradients(f, x)
    m = np.stack([gu, gv], axis=-2)
    _, _, vt = np.linalg.svd(m)
    return np.swapaxes(vt[..., 2:, :], -1, -2)


def normality_residual(f: HolomorphicPolynomial, x) -> np.ndarray:
    w = jacobi_field_W(f, x)
    t = tangent_space(f, x)
    return np.linalg.norm(np.einsum("...mi,...m->...i", t, w), axis=-1) / np.linalg.norm(w, axis=-1)


# --- flow along W ---------------------------------------------------------------------


class FlowFailure(RuntimeError):
    pass


@dataclass
class FlowResult:
    t: np.ndarray
    points: np.ndarray
    u_residual: float
    v_residual: float
    steps: int
    rejected: int


def rk4_adaptive(rhs, y0, t_end: float, tol: float = 1e-8, h0: float = 1e-2, max_steps: int = 100_000):
    """Classical RK4 with step-doubling error control (tolerance per unit time)."""
    y = np.asarray(y0, dtype=float).copy()
    direction = 1.0 if t_end >= 0 else -1.0
    t = 0.0
    ts, ys = [0.0], [y.copy()]
    h = min(abs(h0), abs(t_end)) if t_end != 0 else 0.0
    accepted = rejected = 0

    def step(y, t, h):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    while abs(t_end - t) > 1e-15 * max(1.0, abs(t_end)):
        if accepted + rejected > max_steps:
            raise FlowFailure("step budget exhausted")
        h = min(h, abs(t_end - t))
        hs = direction * h
        full = step(y, t, hs)
        half = step(step(y, t, hs / 2), t + hs / 2, hs / 2)
        err = np.linalg.norm(half - full) / 15
        if err <= tol * h or h < 1e-14:
            t += hs
            y = half + (half - full) / 15
            ts.append(t)
            ys.append(y.copy())
            accepted += 1
            grow = 4.0 if err == 0 else min(4.0, 0.9 * (tol * h / err) ** 0.25)
            h *= max(grow, 0.2)
        else:
            rejected += 1
            h *= max(0.1, 0.9 * (tol * h / err) ** 0.25)
    return np.array(ts), np.array(ys), accepted, rejected


def flow_level_sets(f: HolomorphicPolynomial, x0, t_end: float = 0.1, tol: float = 1e-10) -> FlowResult:
    """Integral curve of W from a cone point; u(c(t)) should equal t and v stay 0."""
    x0 = np.asarray(x0, dtype=float)

    def rhs(_, y):
        try:
            return jacobi_field_W(f, y)
        except SingularPoint as exc:
            raise FlowFailure(str(exc)) from exc

    ts, ys, acc, rej = rk4_adaptive(rhs, x0, t_end, tol=tol)
    vals = f(to_complex(ys))
    return FlowResult(ts, ys, float(np.max(np.abs(vals.real - ts))), float(np.max(np.abs(vals.imag))), acc, rej)


# --- logarithmic cutoff ---------------------------------------------------------------


def cutoff(N: float, r):
    """Logarithmic cutoff: 1 on [e^-N, e^N], 0 outside [e^-2N, e^2N], linear in log r between.

    Returns (phi, dphi/dr).
    """
    if N <= 0:
        raise ValueError("N must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    t = np.log(r)
    phi = np.clip(2.0 - np.abs(t) / N, 0.0, 1.0)
    inner = (t > -2 * N) & (t < -N)
    outer = (t > N) & (t < 2 * N)
    dphi = np.where(inner, 1.0 / (N * r), 0.0) - np.where(outer, 1.0 / (N * r), 0.0)
    return phi[()], dphi[()]


def cutoff_log(N: float, t):
    """The cutoff as a function of t = log r: (phi, dphi/dt)."""
    t = np.asarray(t, dtype=float)
    phi = np.clip(2.0 - np.abs(t) / N, 0.0, 1.0)
    dphi = np.where((t > -2 * N) & (t < -N), 1.0 / N, 0.0) - np.where((t > N) & (t < 2 * N), 1.0 / N, 0.0)
    return phi, dphi


def cutoff_breaks(N: float) -> list[float]:
    return [-2 * N, -N, N, 2 * N]


# --- quadrature --------------------------------------------------------------------


def gauss_pieces(breaks: Sequence[float], order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def link_quadrature(spec: LinkSpec, resolution: int = 12, chart: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Tensor rule on a link chart: coordinates (M, d) and weights including sqrt(det g)."""
    lo, hi, periodic = spec.chart_box(chart)
    axes, wts = [], []
    for a, b, p in zip(lo, hi, periodic):
        if p:
            h = (b - a) / resolution
            axes.append(a + h * (np.arange(resolution) + 0.5))
            wts.append(np.full(resolution, h))
        else:
            x, w = np.polynomial.legendre.leggauss(resolution)
            axes.append(0.5 * math.pi * (x + 1))
            wts.append(0.5 * math.pi * w)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    w = np.prod(np.stack(np.meshgrid(*wts, indexing="ij"), axis=-1).reshape(-1, len(axes)), axis=-1)
    _, jac, _ = spec.chart(grid, chart)
    g = np.swapaxes(jac, -1, -2) @ jac
    return grid, w * np.sqrt(np.linalg.det(g))


# --- Simons' operator -----------------------------------------------------------------


def simons_operator(sff_vectors: np.ndarray, v: np.ndarray) -> np.ndarray:
    """sum_ij <A(E_i,E_j), V> A(E_i,E_j); sff_vectors has shape (..., d, d, m)."""
    coeff = np.einsum("...ijm,...m->...ij", sff_vectors, v)
    return np.einsum("...ij,...ijm->...m", coeff, sff_vectors)


# --- cone patches and the direct second variation ----------------------------------------


NormalField = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class ConePatch:
    """{e^t sigma(c)} for t in [breaks[0], breaks[-1]], c over a link chart."""

    link: LinkSpec
    breaks: Sequence[float]
    t_order: int = 8
    link_resolution: int = 12
    chart: int = 0

    def t_rule(self):
        return gauss_pieces(self.breaks, self.t_order)

    def link_rule(self):
        return link_quadrature(self.link, self.link_resolution, self.chart)


def _fd(field: NormalField, t: float, coords: np.ndarray, h: float):
    d = coords.shape[-1]
    val = field(t, coords)
    dt = (field(t + h, coords) - field(t - h, coords)) / (2 * h)
    dc = np.empty(val.shape + (d,))
    for a in range(d):
        e = np.zeros(d)
        e[a] = h
        dc[..., a] = (field(t, coords + e) - field(t, coords - e)) / (2 * h)
    return val, dt, dc


def second_variation_direct(patch: ConePatch, V: NormalField, W: NormalField | None = None, fd_step: float = 1e-5) -> float:
    """Q(V, W) = int <grad^perp V, grad^perp W> - <V, A~(W)> over the patch.

    ``V(t, coords)`` returns ambient vectors at e^t sigma(coords); it must be
    normal to the cone and vanish at both ends of the t-range.
    """
    link = patch.link
    n = link.cone_dim
    tn, tw = patch.t_rule()
    coords, lw = patch.link_rule()
    x, jac, hess = link.chart(coords, patch.chart)
    fr = _frames_from(link, x, jac)
    sff = _sff_from(fr, hess)
    tang = np.concatenate([x[..., None], fr.tangent], axis=-1)
    perp = np.eye(link.ambient_dim) - tang @ np.swapaxes(tang, -1, -2)
    B = fr.coord_to_frame
    total = 0.0
    for t, wt in zip(tn, tw):
        parts = []
        for F in (V, V if W is None else W):
            val, dt, dc = _fd(F, t, coords, fd_step)
            val = np.einsum("...ij,...j->...i", perp, val)
            dt = np.einsum("...ij,...j->...i", perp, dt)
            de = np.einsum("...ij,...ja,...ab->...ib", perp, dc, B)
            parts.append((val, dt, de))
        (v1, t1, e1), (v2, t2, e2) = parts
        grad = np.sum(t1 * t2, axis=-1) + np.sum(e1 * e2, axis=(-2, -1))
        simons = np.sum(simons_operator(sff.vectors, v2) * v1, axis=-1)
        integrand = math.exp(-2 * t) * (grad - simons)
        total += wt * math.exp(n * t) * float(np.sum(lw * integrand))
    return total


def radial_normal_field(link: LinkSpec, psi: Callable[[np.ndarray], np.ndarray]) -> NormalField:
    """psi(r) nu for a hypersurface link with unit normal nu."""
    if not link.is_hypersurface:
        raise UnsupportedLink("radial normal fields need a hypersurface link")

    def field(t, coords):
        x, jac, _ = link.chart(coords, 0)
        nu = _frames_from(link, x, jac).normal[..., 0]
        return psi(np.exp(t)) * nu

    return field


def radial_reduced_Q(n: int, psi, dpsi, a2: float, breaks, order: int = 16) -> float:
    """int psi'^2 r^{n-1} dr - a2 int psi^2 r^{n-3} dr in t = log r."""
    t, w = gauss_pieces(breaks, order)
    r = np.exp(t)
    return float(np.sum(w * (dpsi(r) ** 2 * r ** n - a2 * psi(r) ** 2 * r ** (n - 2))))


# --- complex cones: cutoff chain ------------------------------------------------------------


def _quadric_link_for(f: HolomorphicPolynomial) -> ComplexQuadricLink:
    if f.nvars != 3 or f.degree != 2 or f.exponents != HolomorphicPolynomial.quadric().exponents or any(
        c != 1 for c in f.coeffs
    ):
        raise UnsupportedLink("link quadrature is available for the quadric z1^2 + z2^2 + z3^2 only")
    return ComplexQuadricLink()


def jacobi_sup_constant(f: HolomorphicPolynomial, samples: int = 10_000, seed: int = 0, ascent_rounds: int = 50) -> float:
    """K = sup over the link of |W|^2 (sampling plus stochastic ascent)."""
    z = sample_link(f, samples, seed)
    vals = np.sum(jacobi_field_W(f, to_real(z)) ** 2, axis=-1)
    rng = np.random.default_rng(seed + 1)
    top = z[np.argsort(vals)[-8:]]
    best = vals.max()
    scale = 0.1
    for _ in range(ascent_rounds):
        trial = top + scale * (rng.standard_normal(top.shape) + 1j * rng.standard_normal(top.shape))
        trial, ok = retract_to_link(f, trial)
        tv = np.sum(jacobi_field_W(f, to_real(trial)) ** 2, axis=-1)
        cur = np.sum(jacobi_field_W(f, to_real(top)) ** 2, axis=-1)
        improve = ok & (tv > cur)
        top = np.where(improve[:, None], trial, top)
        best = max(best, float(np.max(np.where(ok, tv, -np.inf))))
        scale *= 0.9
    return float(best)


def _link_w2(f, resolution):
    link = _quadric_link_for(f)
    coords, lw = link_quadrature(link, resolution)
    x, _, _ = link.chart(coords)
    w2 = np.sum(jacobi_field_W(f, x) ** 2, axis=-1)
    return link, coords, lw, w2


def second_variation_cutoff(f: HolomorphicPolynomial, N: float, resolution: int = 12, t_order: int = 8) -> float:
    """int |grad phi|^2 |W|^2 over the cone, factorized as radial x link quadrature."""
    _, _, lw, w2 = _link_w2(f, resolution)
    n, lam = f.cone_dim, f.homogeneity
    t, wt = gauss_pieces(cutoff_breaks(N), t_order)
    _, dphi = cutoff_log(N, t)
    # |grad phi|^2 = e^{-2t} phi_t^2, |W|^2 = e^{2 lam t} |W(sigma)|^2, dH = e^{nt} dt dsigma
    radial = np.sum(wt * dphi ** 2 * np.exp((n - 2 + 2 * lam) * t))
    return float(radial * np.sum(lw * w2))


def weighted_norm(f: HolomorphicPolynomial, N: float, resolution: int = 12, t_order: int = 8) -> float:
    """int phi^2 |W|^2 r^-2 over the cone."""
    _, _, lw, w2 = _link_w2(f, resolution)
    n, lam = f.cone_dim, f.homogeneity
    t, wt = gauss_pieces([-2 * N, -N, N, 2 * N], t_order)
    phi, _ = cutoff_log(N, t)
    radial = np.sum(wt * phi ** 2 * np.exp((n - 2 + 2 * lam) * t))
    return float(radial * np.sum(lw * w2))


def cutoff_jacobi_field(f: HolomorphicPolynomial, N: float) -> NormalField:
    link = _quadric_link_for(f)

    def field(t, coords):
        x, _, _ = link.chart(coords)
        phi, _ = cutoff_log(N, t)
        return phi * jacobi_field_W(f, math.exp(t) * x)

    return field


def second_variation_direct_cutoff(f: HolomorphicPolynomial, N: float, resolution: int = 8, t_order: int = 6) -> float:
    """Q(phi W, phi W) from the full integrand |grad^perp V|^2 - <V, A~ V>."""
    patch = ConePatch(_quadric_link_for(f), cutoff_breaks(N), t_order, resolution)
    return second_variation_direct(patch, cutoff_jacobi_field(f, N))


@dataclass
class VariationRow:
    N: float
    Q: float
    bound: float
    weighted_norm: float

    @property
    def rayleigh(self) -> float:
        return self.Q / self.weighted_norm

    def to_json(self) -> dict:
        return {"N": self.N, "Q": self.Q, "bound": self.bound, "weighted_norm": self.weighted_norm, "rayleigh": self.rayleigh}


@dataclass
class VariationReport:
    rows: list[VariationRow]
    K: float
    link_volume: float
    seed: int
    direct: dict = field(default_factory=dict)

    def ratios(self) -> list[float]:
        return [b.rayleigh / a.rayleigh for a, b in zip(self.rows, self.rows[1:])]

    def to_json(self) -> dict:
        return {
            "rows": [r.to_json() for r in self.rows],
            "K": self.K,
            "link_volume": self.link_volume,
            "decay_ratios": self.ratios(),
            "seed": self.seed,
            "direct": self.direct,
        }


def rayleigh_decay(
    f: HolomorphicPolynomial,
    N_values: Sequence[float] = (4, 8, 16, 32),
    resolution: int = 12,
    seed: int = 0,
    K_samples: int = 10_000,
    volume_resolution: int = 64,
    direct_N: Sequence[float] = (),
) -> VariationReport:
    if list(N_values) != sorted(N_values) or len(set(N_values)) != len(N_values):
        raise ValueError("N values must be strictly increasing")
    link = _quadric_link_for(f)
    K = jacobi_sup_constant(f, K_samples, seed)
    vol = link_volume(link, volume_resolution)
    rows = []
    for N in N_values:
        q = second_variation_cutoff(f, N, resolution)
        rows.append(VariationRow(float(N), q, 2 * K / N * vol, weighted_norm(f, N, resolution)))
    direct = {}
    for N in direct_N:
        qd = second_variation_direct_cutoff(f, N)
        qc = second_variation_cutoff(f, N, resolution)
        direct[str(N)] = {"Q_direct": float(qd), "Q_cutoff": qc, "rel_diff": float(abs(qc - qd) / max(abs(qd), 1e-12))}
    return VariationReport(rows, K, vol, seed, direct)


# --- special Lagrangian second variation via forms -------------------------------------------


def sl_second_variation_forms(patch: ConePatch, V: NormalField, fd_step: float = 1e-5) -> float:
    """int |d alpha|^2 + |delta alpha|^2 with alpha = (J V)^flat on the cone.

    Coordinates y = (t, c); metric g = e^{2t} diag(1, g_link). d and delta are
    central differences of alpha and of the flux sqrt(g) g^{ij} alpha_j.
    """
    link = patch.link
    m = link.ambient_dim
    if m % 2:
        raise UnsupportedLink("SL forms need an even-dimensional ambient space")
    J = ComplexStructure(m // 2).matrix
    tn, tw = patch.t_rule()
    coords, _ = patch.link_rule()
    d = coords.shape[-1]
    dim = d + 1

    def geometry_at(t, c):
        x, jac, _ = link.chart(c, patch.chart)
        r = math.exp(t)
        basis = np.concatenate([r * x[..., None], r * jac], axis=-1)  # dX/dy, (M, m, dim)
        g = np.swapaxes(basis, -1, -2) @ basis
        alpha = np.einsum("...mi,...m->...i", basis, V(t, c) @ J.T)
        return g, alpha

    def flux(t, c):
        g, alpha = geometry_at(t, c)
        ginv = np.linalg.inv(g)
        return np.sqrt(np.linalg.det(g))[..., None] * np.einsum("...ij,...j->...i", ginv, alpha)

    total = 0.0
    h = fd_step
    for t, wt in zip(tn, tw):
        g, _ = geometry_at(t, coords)
        ginv = np.linalg.inv(g)
        sqrtg = np.sqrt(np.linalg.det(g))
        dalpha = np.empty(coords.shape[:-1] + (dim, dim))
        div = np.zeros(coords.shape[:-1])
        for i in range(dim):
            if i == 0:
                ap, am = geometry_at(t + h, coords)[1], geometry_at(t - h, coords)[1]
                fp, fm = flux(t + h, coords), flux(t - h, coords)
            else:
                e = np.zeros(d)
                e[i - 1] = h
                ap, am = geometry_at(t, coords + e)[1], geometry_at(t, coords - e)[1]
                fp, fm = flux(t, coords + e), flux(t, coords - e)
            dalpha[..., i, :] = (ap - am) / (2 * h)  # d_i alpha_j
            div += (fp[..., i] - fm[..., i]) / (2 * h)
        F = dalpha - dalpha.swapaxes(-1, -2)  # F_ij = d_i alpha_j - d_j alpha_i
        d_sq = 0.5 * np.einsum("...ik,...jl,...ij,...kl->...", ginv, ginv, F, F)
        delta = -div / sqrtg
        total += wt * float(np.sum((d_sq + delta ** 2) * sqrtg))
    # link-chart weights: the tensor rule without the density, which sqrtg already carries
    return total * _chart_cell(patch)


def _chart_cell(patch: ConePatch) -> float:
    """Uniform cell weight of the link rule (periodic charts only)."""
    lo, hi, periodic = patch.link.chart_box(patch.chart)
    if not all(periodic):
        raise UnsupportedLink("SL forms path needs a fully periodic link chart")
    return float(np.prod([(b - a) / patch.link_resolution for a, b in zip(lo, hi)]))


def sl_tangent_field(link: LinkSpec, coeff: Callable[[float, np.ndarray], np.ndarray]) -> NormalField:
    """V = J Y for the tangent field Y = sum_i coeff_i (sigma, E_1, ...)_i."""
    J = ComplexStructure(link.ambient_dim // 2).matrix

    def field(t, coords):
        x, jac, _ = link.chart(coords, 0)
        fr = _frames_from(link, x, jac)
        tang = np.concatenate([x[..., None], fr.tangent], axis=-1)
        y = np.einsum("...mi,...i->...m", tang, coeff(t, coords))
        return y @ J.T

    return field


def translation_field(link: LinkSpec, a: np.ndarray, profile: Callable[[float], float]) -> NormalField:
    """profile(t) times the normal part of the constant vector J a."""
    J = ComplexStructure(link.ambient_dim // 2).matrix
    b = J @ np.asarray(a, dtype=float)

    def field(t, coords):
        x, jac, _ = link.chart(coords, 0)
        fr = _frames_from(link, x, jac)
        tang = np.concatenate([x[..., None], fr.tangent], axis=-1)
        perp = b - np.einsum("...mi,...i->...m", tang, np.einsum("...mi,m->...i", tang, b))
        return profile(t) * perp

    return field
