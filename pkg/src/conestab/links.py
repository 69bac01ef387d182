"""Catalog of cone links in spheres, with charts, frames and curvature.

Every link exposes a chart ``coords -> (X, dX, d2X)`` with closed-form first
and second derivatives; frames and second fundamental forms are built from
those derivatives, never from finite differences. All functions accept a
leading batch axis on ``coords``.

Complex coordinates are interleaved: ``(x1, y1, x2, y2, ...)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import ClassVar

import numpy as np

CHART_MARGIN = 1e-3


class ChartDegeneracy(ValueError):
    """Chart Jacobian lost rank; re-sample or switch chart."""


class UnsupportedLink(ValueError):
    pass


# --- hyperspherical coordinates on S^d -------------------------------------


def _sphere_factors(phi: np.ndarray):
    """Factor tables for x_i = prod_j F[i, j] and their angle derivatives."""
    d = phi.shape[-1]
    shape = phi.shape[:-1] + (d + 1, d)
    f0 = np.ones(shape)
    f1 = np.zeros(shape)
    f2 = np.zeros(shape)
    s, c = np.sin(phi), np.cos(phi)
    for i in range(d + 1):
        for j in range(d):
            if j < i:
                f0[..., i, j], f1[..., i, j], f2[..., i, j] = s[..., j], c[..., j], -s[..., j]
            elif j == i:
                f0[..., i, j], f1[..., i, j], f2[..., i, j] = c[..., j], -s[..., j], -c[..., j]
    return f0, f1, f2


def sphere_chart(phi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit S^d in R^{d+1}: position, Jacobian (.., d+1, d), Hessian (.., d+1, d, d)."""
    phi = np.asarray(phi, dtype=float)
    d = phi.shape[-1]
    f0, f1, f2 = _sphere_factors(phi)
    x = np.prod(f0, axis=-1)
    jac = np.empty(phi.shape[:-1] + (d + 1, d))
    hess = np.empty(phi.shape[:-1] + (d + 1, d, d))
    for a in range(d):
        g = f0.copy()
        g[..., a] = f1[..., a]
        jac[..., a] = np.prod(g, axis=-1)
        for b in range(a, d):
            g = f0.copy()
            if a == b:
                g[..., a] = f2[..., a]
            else:
                g[..., a] = f1[..., a]
                g[..., b] = f1[..., b]
            hess[..., a, b] = hess[..., b, a] = np.prod(g, axis=-1)
    return x, jac, hess


def sphere_volume(d: int) -> float:
    """Volume of the unit d-sphere."""
    return 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def _sphere_box(d: int):
    lo = [CHART_MARGIN * math.pi] * (d - 1) + [0.0]
    hi = [math.pi * (1 - CHART_MARGIN)] * (d - 1) + [2 * math.pi]
    periodic = [False] * (d - 1) + [True]
    return lo, hi, periodic


def _flip_rows(x, jac, hess):
    # second chart: same angles, reversed ambient axes of the factor sphere
    return x[..., ::-1], jac[..., ::-1, :], hess[..., ::-1, :, :]


# --- link specs --------------------------------------------------------------


@dataclass(frozen=True)
class LinkSpec:
    type_name: ClassVar[str] = ""

    @property
    def ambient_dim(self) -> int:
        raise NotImplementedError

    @property
    def link_dim(self) -> int:
        raise NotImplementedError

    @property
    def cone_dim(self) -> int:
        return self.link_dim + 1

    @property
    def is_hypersurface(self) -> bool:
        return self.ambient_dim == self.cone_dim + 1

    charts: ClassVar[tuple[int, ...]] = (0, 1)

    def chart(self, coords, chart: int = 0):
        raise NotImplementedError

    def chart_box(self, chart: int = 0):
        """(lower, upper, periodic) per coordinate; sampling stays inside."""
        raise NotImplementedError

    def normal_frame(self, x, tangent):
        return None

    def sample_coords(self, rng, count: int, chart: int = 0) -> np.ndarray:
        lo, hi, _ = self.chart_box(chart)
        return rng.uniform(lo, hi, size=(count, len(lo)))

    def to_json(self) -> dict:
        return {"type": self.type_name, **asdict(self)}


@dataclass(frozen=True)
class ProductOfSpheres(LinkSpec):
    """S^k(r1) x S^l(r2) in S^{k+l+1}; radii default to the minimal ones."""

    type_name: ClassVar[str] = "ProductOfSpheres"
    k: int = 1
    l: int = 1
    r1: float | None = None
    r2: float | None = None

    def __post_init__(self):
        if self.k < 1 or self.l < 1:
            raise ValueError("factor sphere dimensions must be >= 1")
        r1, r2 = minimal_radii(self.k, self.l)
        if self.r1 is None:
            object.__setattr__(self, "r1", r1)
        if self.r2 is None:
            object.__setattr__(self, "r2", r2)
        if abs(self.r1 ** 2 + self.r2 ** 2 - 1.0) > 1e-12:
            raise ValueError("radii must satisfy r1^2 + r2^2 = 1")

    @property
    def ambient_dim(self):
        return self.k + self.l + 2

    @property
    def link_dim(self):
        return self.k + self.l

    @property
    def is_minimal(self) -> bool:
        r1, r2 = minimal_radii(self.k, self.l)
        return abs(self.r1 - r1) < 1e-12 and abs(self.r2 - r2) < 1e-12

    def chart(self, coords, chart=0):
        coords = np.asarray(coords, dtype=float)
        k, l = self.k, self.l
        xu, ju, hu = sphere_chart(coords[..., :k])
        xv, jv, hv = sphere_chart(coords[..., k:])
        if chart == 1:
            xu, ju, hu = _flip_rows(xu, ju, hu)
            xv, jv, hv = _flip_rows(xv, jv, hv)
        batch = coords.shape[:-1]
        m, d = self.ambient_dim, self.link_dim
        x = np.concatenate([self.r1 * xu, self.r2 * xv], axis=-1)
        jac = np.zeros(batch + (m, d))
        hess = np.zeros(batch + (m, d, d))
        jac[..., : k + 1, :k] = self.r1 * ju
        jac[..., k + 1:, k:] = self.r2 * jv
        hess[..., : k + 1, :k, :k] = self.r1 * hu
        hess[..., k + 1:, k:, k:] = self.r2 * hv
        return x, jac, hess

    def chart_box(self, chart=0):
        a, b = _sphere_box(self.k), _sphere_box(self.l)
        return a[0] + b[0], a[1] + b[1], a[2] + b[2]

    def normal_frame(self, x, tangent):
        k = self.k
        u = x[..., : k + 1] / self.r1
        v = x[..., k + 1:] / self.r2
        nu = np.concatenate([self.r2 * u, -self.r1 * v], axis=-1)
        return nu[..., None]


@dataclass(frozen=True)
class RoundSphere(LinkSpec):
    """Totally geodesic S^d in S^{m-1}; the cone is a flat d+1 plane."""

    type_name: ClassVar[str] = "RoundSphere"
    d: int = 2
    m: int = 4

    def __post_init__(self):
        if self.d < 1 or self.m < self.d + 2:
            raise ValueError("need d >= 1 and m >= d + 2")

    @property
    def ambient_dim(self):
        return self.m

    @property
    def link_dim(self):
        return self.d

    def chart(self, coords, chart=0):
        x, jac, hess = sphere_chart(coords)
        if chart == 1:
            x, jac, hess = _flip_rows(x, jac, hess)
        pad = self.m - self.d - 1
        x = np.concatenate([x, np.zeros(x.shape[:-1] + (pad,))], axis=-1)
        jac = np.concatenate([jac, np.zeros(jac.shape[:-2] + (pad, self.d))], axis=-2)
        hess = np.concatenate([hess, np.zeros(hess.shape[:-3] + (pad, self.d, self.d))], axis=-3)
        return x, jac, hess

    def chart_box(self, chart=0):
        return _sphere_box(self.d)


def _hopf_quadratics() -> np.ndarray:
    """Symmetric Q_c with fiber_c(x) = x^T Q_c x; order (s, -Im w, Re w)."""
    q = np.zeros((3, 4, 4))
    # s = |z1|^2 - |z2|^2
    q[0] = np.diag([1.0, 1.0, -1.0, -1.0])
    # -Im w = -2 (x0 x3 - x1 x2)
    q[1, 0, 3] = q[1, 3, 0] = -1.0
    q[1, 1, 2] = q[1, 2, 1] = 1.0
    # Re w = 2 (x0 x2 + x1 x3)
    q[2, 0, 2] = q[2, 2, 0] = 1.0
    q[2, 1, 3] = q[2, 3, 1] = 1.0
    return q


HOPF_Q = _hopf_quadratics()


def hopf_map(x) -> np.ndarray:
    """Hopf map R^4 -> R^3, components (|z1|^2-|z2|^2, -Im w, Re w), w = 2 conj(z1) z2."""
    x = np.asarray(x, dtype=float)
    return np.einsum("...i,cij,...j->...c", x, HOPF_Q, x)


@dataclass(frozen=True)
class HopfGraphLink(LinkSpec):
    """Link of the graph cone of slope * |x| * hopf(x/|x|) in R^7.

    The default slope sqrt(5)/2 gives the Lawson-Osserman cone.
    """

    type_name: ClassVar[str] = "HopfGraphLink"
    slope: float = math.sqrt(5) / 2

    @property
    def ambient_dim(self):
        return 7

    @property
    def link_dim(self):
        return 3

    def chart(self, coords, chart=0):
        s, js, hs = sphere_chart(coords)
        if chart == 1:
            s, js, hs = _flip_rows(s, js, hs)
        c = self.slope
        norm = math.sqrt(1 + c * c)
        q = HOPF_Q
        x = np.concatenate([s, c * hopf_map(s)], axis=-1) / norm
        # d(fiber)/dx = 2 Q x
        dfib = 2 * np.einsum("cij,...j->...ci", q, s)
        jac = np.concatenate([js, c * np.einsum("...ci,...ia->...ca", dfib, js)], axis=-2) / norm
        hfib = 2 * np.einsum("cij,...ia,...jb->...cab", q, js, js) + np.einsum(
            "...ci,...iab->...cab", dfib, hs
        )
        hess = np.concatenate([hs, c * hfib], axis=-3) / norm
        return x, jac, hess

    def chart_box(self, chart=0):
        return _sphere_box(3)

    def embed_base(self, z) -> np.ndarray:
        """Position for a unit base point given as complex (z1, z2)."""
        z = np.asarray(z, dtype=complex)
        x = np.stack([z[..., 0].real, z[..., 0].imag, z[..., 1].real, z[..., 1].imag], axis=-1)
        c = self.slope
        return np.concatenate([x, c * hopf_map(x)], axis=-1) / math.sqrt(1 + c * c)


def _rz(t):
    c, s = np.cos(t), np.sin(t)
    o, z = np.ones_like(t), np.zeros_like(t)
    r = np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)
    dr = np.stack([np.stack([-s, -c, z], -1), np.stack([c, -s, z], -1), np.stack([z, z, z], -1)], -2)
    ddr = np.stack([np.stack([-c, s, z], -1), np.stack([-s, -c, z], -1), np.stack([z, z, z], -1)], -2)
    return r, dr, ddr


def _ry(t):
    c, s = np.cos(t), np.sin(t)
    o, z = np.ones_like(t), np.zeros_like(t)
    r = np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1), np.stack([-s, z, c], -1)], -2)
    dr = np.stack([np.stack([-s, z, c], -1), np.stack([z, z, z], -1), np.stack([-c, z, -s], -1)], -2)
    ddr = np.stack([np.stack([-c, z, -s], -1), np.stack([z, z, z], -1), np.stack([s, z, -c], -1)], -2)
    return r, dr, ddr


# second-chart right factor: cyclic permutation of axes
_QUADRIC_P = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class ComplexQuadricLink(LinkSpec):
    """Link of {z1^2 + z2^2 + z3^2 = 0} in S^5, charted by ZYZ Euler angles.

    A rotation R maps to (R e1 + i R e2)/sqrt(2).
    """

    type_name: ClassVar[str] = "ComplexQuadricLink"
    n_c: int = 2

    def __post_init__(self):
        if self.n_c != 2:
            raise UnsupportedLink("only the n_c = 2 quadric has a global chart")

    @property
    def ambient_dim(self):
        return 6

    @property
    def link_dim(self):
        return 3

    def chart(self, coords, chart=0):
        coords = np.asarray(coords, dtype=float)
        a, b, g = coords[..., 0], coords[..., 1], coords[..., 2]
        fa, fb, fg = _rz(a), _ry(b), _rz(g)
        p = np.eye(3) if chart == 0 else _QUADRIC_P
        factors = [fa, fb, fg]

        def prod(orders):
            m = factors[0][orders[0]] @ factors[1][orders[1]] @ factors[2][orders[2]]
            return m @ p

        rot = prod((0, 0, 0))
        drot = [prod(tuple(1 if i == k else 0 for i in range(3))) for k in range(3)]
        ddrot = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                o = [0, 0, 0]
                o[i] += 1
                o[j] += 1
                ddrot[i][j] = prod(tuple(o))

        def embed(r):
            out = np.empty(r.shape[:-2] + (6,))
            out[..., 0::2] = r[..., :, 0]
            out[..., 1::2] = r[..., :, 1]
            return out / math.sqrt(2)

        x = embed(rot)
        jac = np.stack([embed(drot[i]) for i in range(3)], axis=-1)
        hess = np.stack([np.stack([embed(ddrot[i][j]) for j in range(3)], -1) for i in range(3)], -2)
        return x, jac, hess

    def chart_box(self, chart=0):
        return [0.0, CHART_MARGIN * math.pi, 0.0], [2 * math.pi, math.pi * (1 - CHART_MARGIN), 2 * math.pi], [
            True,
            False,
            True,
        ]


@dataclass(frozen=True)
class HarveyLawsonT2Link(LinkSpec):
    """(e^{i t1}, e^{i t2}, e^{-i(t1+t2)})/sqrt(3) in S^5; the chart is global."""

    type_name: ClassVar[str] = "HarveyLawsonT2Link"
    charts: ClassVar[tuple[int, ...]] = (0,)

    @property
    def ambient_dim(self):
        return 6

    @property
    def link_dim(self):
        return 2

    def chart(self, coords, chart=0):
        coords = np.asarray(coords, dtype=float)
        t1, t2 = coords[..., 0], coords[..., 1]
        phases = np.stack([t1, t2, -(t1 + t2)], axis=-1)
        dphase = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
        z = np.exp(1j * phases) / math.sqrt(3)
        dz = 1j * z[..., :, None] * dphase
        ddz = -z[..., :, None, None] * dphase[:, :, None] * dphase[:, None, :]

        def real(w, axis):
            w = np.moveaxis(w, axis, -1)
            out = np.empty(w.shape[:-1] + (2 * w.shape[-1],))
            out[..., 0::2] = w.real
            out[..., 1::2] = w.imag
            return np.moveaxis(out, -1, axis)

        return real(z, -1), real(dz, -2), real(ddz, -3)

    def chart_box(self, chart=0):
        return [0.0, 0.0], [2 * math.pi, 2 * math.pi], [True, True]


LINK_TYPES = {
    cls.type_name: cls
    for cls in (ProductOfSpheres, RoundSphere, HopfGraphLink, ComplexQuadricLink, HarveyLawsonT2Link)
}


def link_from_json(doc: dict) -> LinkSpec:
    doc = dict(doc)
    try:
        cls = LINK_TYPES[doc.pop("type")]
    except KeyError as exc:
        raise ValueError(f"unknown link type in {doc!r}") from exc
    return cls(**doc)


def minimal_radii(k: int, l: int) -> tuple[float, float]:
    """Radii making S^k(r1) x S^l(r2) minimal in the unit sphere."""
    return math.sqrt(k / (k + l)), math.sqrt(l / (k + l))


# --- geometry ----------------------------------------------------------------


@dataclass
class LinkPoint:
    chart: int
    coords: np.ndarray
    position: np.ndarray


@dataclass
class FrameData:
    tangent: np.ndarray  # (..., m, n-1) orthonormal columns
    normal: np.ndarray  # (..., m, m-n) orthonormal columns, tangent to the sphere
    metric: np.ndarray  # (..., n-1, n-1) first fundamental form in chart coords
    coord_to_frame: np.ndarray = field(repr=False)  # E = dX @ B


@dataclass
class SFF:
    vectors: np.ndarray  # (..., n-1, n-1, m): A(E_i, E_j) as ambient vectors
    components: np.ndarray  # (..., n-1, n-1, m-n) in the normal frame

    @property
    def norm_sq(self) -> np.ndarray:
        return np.sum(self.vectors ** 2, axis=(-3, -2, -1))

    def scaled(self, factor: float) -> "SFF":
        return SFF(self.vectors * factor, self.components * factor)


def embed(spec: LinkSpec, coords, chart: int = 0) -> LinkPoint:
    coords = np.asarray(coords, dtype=float)
    _, _, periodic = spec.chart_box(chart)
    if coords.shape[-1] != len(periodic):
        raise ValueError(f"expected {len(periodic)} chart coordinates")
    for c, p in zip(np.moveaxis(coords, -1, 0), periodic):
        # non-periodic coordinates are polar angles
        if not p and (np.any(c < 0) or np.any(c > math.pi)):
            raise ValueError("polar chart coordinate outside [0, pi]")
    x, _, _ = spec.chart(coords, chart)
    return LinkPoint(chart, coords, x)


def frames(spec: LinkSpec, point: LinkPoint, rank_tol: float = 1e-8) -> FrameData:
    x, jac, _ = spec.chart(point.coords, point.chart)
    return _frames_from(spec, x, jac, rank_tol)


def _frames_from(spec, x, jac, rank_tol=1e-8):
    q, r = np.linalg.qr(jac)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    scale = np.max(np.abs(diag), axis=-1, keepdims=True)
    if np.any(np.abs(diag) < rank_tol * scale):
        raise ChartDegeneracy("chart Jacobian is rank deficient at this point")
    sign = np.sign(diag)
    tangent = q * sign[..., None, :]
    r = r * sign[..., :, None]
    eye = np.broadcast_to(np.eye(r.shape[-1]), r.shape)
    coord_to_frame = np.linalg.solve(r, eye)
    normal = spec.normal_frame(x, tangent)
    if normal is None:
        normal = _complement(x, tangent, spec.ambient_dim - spec.cone_dim)
    metric = np.swapaxes(jac, -1, -2) @ jac
    return FrameData(tangent, normal, metric, coord_to_frame)


def _complement(x, tangent, count):
    m = x.shape[-1]
    span = np.concatenate([x[..., None], tangent], axis=-1)
    proj = np.eye(m) - span @ np.swapaxes(span, -1, -2)
    u, _, _ = np.linalg.svd(proj)
    out = u[..., :, :count]
    # fix signs so the largest entry of each column is positive
    idx = np.argmax(np.abs(out), axis=-2)
    pick = np.take_along_axis(out, idx[..., None, :], axis=-2)
    return out * np.sign(pick)


def second_fundamental_form(spec: LinkSpec, point: LinkPoint) -> SFF:
    x, jac, hess = spec.chart(point.coords, point.chart)
    fr = _frames_from(spec, x, jac)
    return _sff_from(fr, hess)


def _sff_from(fr: FrameData, hess) -> SFF:
    nrm = fr.normal
    comp_coord = np.einsum("...ma,...mij->...aij", nrm, hess)  # normal components of d2X
    b = fr.coord_to_frame
    comp = np.einsum("...aij,...ip,...jq->...pqa", comp_coord, b, b)
    vectors = np.einsum("...pqa,...ma->...pqm", comp, nrm)
    return SFF(vectors, comp)


def geometry(spec: LinkSpec, coords, chart: int = 0):
    """Position, frames and SFF in one pass (batched)."""
    x, jac, hess = spec.chart(coords, chart)
    fr = _frames_from(spec, x, jac)
    return x, fr, _sff_from(fr, hess)


def mean_curvature_residual(spec: LinkSpec, point: LinkPoint) -> np.ndarray:
    sff = second_fundamental_form(spec, point)
    trace = np.einsum("...iim->...m", sff.vectors)
    return np.linalg.norm(trace, axis=-1)


def cone_sff(spec: LinkSpec, r: float, point: LinkPoint) -> SFF:
    """SFF of the cone at r*sigma on link-tangent pairs; radial entries vanish."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return second_fundamental_form(spec, point).scaled(1.0 / r)


def link_volume(spec: LinkSpec, resolution: int = 64) -> float:
    """H^{n-1} of the link by midpoint quadrature in the chart."""
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    if isinstance(spec, ProductOfSpheres):
        return _sphere_volume_quad(spec.k, resolution) * spec.r1 ** spec.k * _sphere_volume_quad(
            spec.l, resolution
        ) * spec.r2 ** spec.l
    if isinstance(spec, RoundSphere):
        return _sphere_volume_quad(spec.d, resolution)
    dim = spec.link_dim
    lo, hi, periodic = spec.chart_box(0)
    # integrate over the full coordinate box; the margin is for sampling only
    if isinstance(spec, HopfGraphLink):
        lo, hi = [0.0, 0.0, 0.0], [math.pi, math.pi, 2 * math.pi]
    elif isinstance(spec, ComplexQuadricLink):
        lo, hi = [0.0, 0.0, 0.0], [2 * math.pi, math.pi, 2 * math.pi]
    axes = [l + (h - l) * (np.arange(resolution) + 0.5) / resolution for l, h in zip(lo, hi)]
    cell = np.prod([(h - l) / resolution for l, h in zip(lo, hi)])
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    total = 0.0
    for chunk in np.array_split(grid, max(1, len(grid) // 20000)):
        _, jac, _ = spec.chart(chunk)
        g = np.swapaxes(jac, -1, -2) @ jac
        total += np.sum(np.sqrt(np.abs(np.linalg.det(g))))
    return float(total * cell)


def _sphere_volume_quad(d: int, resolution: int) -> float:
    # separable density prod_j sin^{d-1-j}(phi_j) of hyperspherical charts
    vol = 2 * math.pi
    t = math.pi * (np.arange(resolution) + 0.5) / resolution
    h = math.pi / resolution
    for p in range(1, d):
        vol *= float(np.sum(np.sin(t) ** p) * h)
    return vol


def sample_points(spec: LinkSpec, rng, count: int, chart: int = 0) -> LinkPoint:
    coords = spec.sample_coords(rng, count, chart)
    x, _, _ = spec.chart(coords, chart)
    return LinkPoint(chart, coords, x)
