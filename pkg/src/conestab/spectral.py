"""Spectral stability classification of minimal cones.

The cone is strictly stable when d0 = (n-2)^2/4 + mu1 > 0, where mu1 is the
bottom of the link stability spectrum (sign convention: eigenvalues of
-(Delta + |A|^2)). Radial problems are solved in t = log r with the
substitution phi = r^{-(n-2)/2} psi, which turns the weighted operator into a
Dirichlet Laplacian plus the constant (n-2)^2/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .eigen import sparse_smallest_eigs, sym_eig
from .links import LinkSpec, ProductOfSpheres, RoundSphere, UnsupportedLink, minimal_radii


class Verdict(str, Enum):
    STRICTLY_STABLE = "StrictlyStable"
    STABLE_NOT_STRICTLY = "StableNotStrictlyStable"
    NOT_STABLE = "NotStableByCriterion"


def gamma(n: int, eps: float, i: int = 1) -> float:
    """Dirichlet eigenvalues of -T on [eps, 1] in the r^{n-3} dr weight."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if n < 2 or i < 1:
        raise ValueError("need n >= 2 and i >= 1")
    return (n - 2) ** 2 / 4 + (i * math.pi / math.log(eps)) ** 2


def d0(n: int, mu1) -> float | Fraction:
    """Stability threshold (n-2)^2/4 + mu1; exact for rational mu1."""
    if isinstance(mu1, (int, Fraction)):
        return Fraction((n - 2) ** 2, 4) + mu1
    return (n - 2) ** 2 / 4 + mu1


def verdict_for(d: float, tol: float = 0.0) -> Verdict:
    if d > tol:
        return Verdict.STRICTLY_STABLE
    if d >= -tol:
        return Verdict.STABLE_NOT_STRICTLY
    return Verdict.NOT_STABLE


# --- radial problem -----------------------------------------------------------


@dataclass
class RadialEigenProblem:
    n: int
    eps: float
    grid_size: int
    eigenvalues: np.ndarray
    analytic: np.ndarray
    r: np.ndarray
    eigenfunctions: np.ndarray  # columns phi_i(r), unit norm in r^{n-3} dr

    @property
    def rel_err(self) -> np.ndarray:
        return np.abs(self.eigenvalues - self.analytic) / np.abs(self.analytic)


def radial_operator(n: int, eps: float, grid_size: int):
    """Interior t-grid and the symmetric tridiagonal (diag, off) of -T."""
    length = -math.log(eps)
    h = length / (grid_size + 1)
    t = math.log(eps) + h * np.arange(1, grid_size + 1)
    diag = np.full(grid_size, 2.0 / h ** 2 + (n - 2) ** 2 / 4)
    off = np.full(grid_size - 1, -1.0 / h ** 2)
    return t, h, diag, off


def radial_eigs(n: int, eps: float, grid_size: int = 256, count: int = 3) -> RadialEigenProblem:
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    t, h, diag, off = radial_operator(n, eps, grid_size)
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    w, v = sym_eig(mat)
    w, v = w[:count], v[:, :count]
    r = np.exp(t)
    # discrete psi normalized by h * sum psi^2 = 1, then phi = r^{-(n-2)/2} psi
    psi = v / math.sqrt(h)
    sign = np.sign(psi[np.argmax(np.abs(psi), axis=0), np.arange(count)])
    phi = psi * sign * r[:, None] ** (-(n - 2) / 2)
    analytic = np.array([gamma(n, eps, i) for i in range(1, count + 1)])
    return RadialEigenProblem(n, eps, grid_size, w, analytic, r, phi)


def radial_weighted_inner(prob: RadialEigenProblem, f, g) -> float:
    """Discrete (f, g) = int f g r^{n-3} dr on the problem's grid."""
    h = -math.log(prob.eps) / (prob.grid_size + 1)
    # dr = r dt
    return float(np.sum(f * g * prob.r ** (prob.n - 2)) * h)


def richardson_order(n: int, eps: float, grids=(64, 128, 256)) -> float:
    """Observed convergence order of the first radial eigenvalue."""
    vals = [radial_eigs(n, eps, g, count=1).eigenvalues[0] for g in grids]
    e1, e2 = vals[0] - vals[1], vals[1] - vals[2]
    return math.log2(abs(e1 / e2)) if e2 != 0 else math.inf


# --- link spectra -------------------------------------------------------------


@dataclass
class LinkSpectrum:
    eigenvalues: np.ndarray  # distinct mu_j, ascending
    multiplicities: np.ndarray
    labels: list[tuple[int, ...]]  # harmonic degrees producing each mu_j
    curvature_sq: float

    @property
    def mu1(self) -> float:
        return float(self.eigenvalues[0])


def harmonic_dim(j: int, k: int) -> int:
    """Dimension of degree-j spherical harmonics on S^k."""
    if j == 0:
        return 1
    return math.comb(j + k, k) - math.comb(j + k - 2, k)


def scalar_link_spectrum(spec: LinkSpec, cutoff: int = 6) -> LinkSpectrum:
    """Spectrum of -(Delta + |A|^2) for hypersurface or totally geodesic links."""
    if isinstance(spec, ProductOfSpheres):
        if not spec.is_minimal:
            raise UnsupportedLink("product link is not minimal")
        k, l, r1, r2 = spec.k, spec.l, spec.r1, spec.r2
        a2 = k * (r2 / r1) ** 2 + l * (r1 / r2) ** 2
        vals: dict[float, list] = {}
        for j in range(cutoff + 1):
            for h in range(cutoff + 1):
                lap = j * (j + k - 1) / r1 ** 2 + h * (h + l - 1) / r2 ** 2
                key = round(lap - a2, 10)
                entry = vals.setdefault(key, [0, []])
                entry[0] += harmonic_dim(j, k) * harmonic_dim(h, l)
                entry[1].append((j, h))
        return _spectrum(vals, a2)
    if isinstance(spec, RoundSphere):
        d = spec.d
        codim = spec.m - d - 1
        vals = {}
        for j in range(cutoff + 1):
            # trivial flat normal bundle: codim copies of the function spectrum
            vals[float(j * (j + d - 1))] = [harmonic_dim(j, d) * codim, [(j,)]]
        return _spectrum(vals, 0.0)
    raise UnsupportedLink(
        f"{type(spec).__name__}: no scalar reduction of the normal Jacobi operator; "
        "use the form-based checks in conestab.variations / conestab.coneforms"
    )


def _spectrum(vals, a2) -> LinkSpectrum:
    keys = sorted(vals)
    return LinkSpectrum(
        np.array(keys, dtype=float),
        np.array([vals[k][0] for k in keys]),
        [tuple(vals[k][1]) for k in keys],
        float(a2),
    )


def exact_mu1(spec: LinkSpec):
    """mu1 as an exact rational where the catalog allows it."""
    if isinstance(spec, ProductOfSpheres) and spec.is_minimal:
        return -Fraction(spec.k + spec.l)
    if isinstance(spec, RoundSphere):
        return Fraction(0)
    return scalar_link_spectrum(spec).mu1


# --- classification -----------------------------------------------------------


@dataclass
class SpectralReport:
    n: int
    mu1: float
    d0: float
    verdict: Verdict
    lambda1_table: list[dict] = field(default_factory=list)
    grid: int = 256
    seed: int = 0
    link: dict | None = None
    coefficients: list[dict] = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mu1": float(self.mu1),
            "d0": float(self.d0),
            "verdict": self.verdict.value,
            "lambda1_table": self.lambda1_table,
            "grid": self.grid,
            "seed": self.seed,
            "link": self.link,
            "orientation": "chart order",
            "residuals": self.residuals,
        }


def classify(spec: LinkSpec, eps_values=(math.exp(-math.pi), math.exp(-2.0), 0.01), grid: int = 256, seed: int = 0) -> SpectralReport:
    n = spec.cone_dim
    mu = exact_mu1(spec)
    d = d0(n, mu)
    table = []
    for eps in eps_values:
        analytic = gamma(n, eps) + float(mu)
        numeric = radial_eigs(n, eps, grid, count=1).eigenvalues[0] + float(mu)
        table.append(
            {"eps": eps, "analytic": analytic, "numeric": float(numeric), "rel_err": float(abs(numeric - analytic) / max(abs(analytic), 1e-300))}
        )
    return SpectralReport(
        n=n,
        mu1=float(mu),
        d0=float(d),
        verdict=verdict_for(float(d)),
        lambda1_table=table,
        grid=grid,
        seed=seed,
        link=spec.to_json(),
        residuals={"max_lambda1_rel_err": max((row["rel_err"] for row in table), default=0.0)},
    )


def lawson_sweep(n_values) -> list[dict]:
    """Rows (n, k, l, mu1, d0, verdict) over minimal S^k x S^l, k + l = n - 1, k, l >= 1."""
    rows = []
    for n in n_values:
        if not 2 <= n <= 12:
            raise ValueError("lawson_sweep supports 2 <= n <= 12")
        for k in range(1, n - 1):
            l = n - 1 - k
            mu = -Fraction(n - 1)
            d = d0(n, mu)
            rows.append({"n": n, "k": k, "l": l, "mu1": mu, "d0": d, "verdict": verdict_for(float(d)).value})
    return rows


# --- direct truncated-cone discretization --------------------------------------


def truncated_cone_lambda1(spec: LinkSpec, eps: float, grid: tuple[int, ...] = (64, 16), tol: float = 1e-8, seed: int = 0) -> float:
    """Smallest eigenvalue of -r^2 L on the truncated cone by a direct product grid.

    Clifford-torus links (k = l = 1) use a (t, theta1, theta2) grid with
    periodic angles; round-sphere links reduce to the radial problem since the
    bottom mode is the constant.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    n = spec.cone_dim
    if isinstance(spec, RoundSphere):
        return float(radial_eigs(n, eps, grid[0], count=1).eigenvalues[0])
    if not (isinstance(spec, ProductOfSpheres) and spec.k == 1 and spec.l == 1):
        raise UnsupportedLink("direct discretization needs a Clifford-torus or round-sphere link")
    nt, nth = grid[0], grid[1]
    _, h, diag, off = radial_operator(n, eps, nt)
    a2 = spec.k * (spec.r2 / spec.r1) ** 2 + spec.l * (spec.r1 / spec.r2) ** 2
    hth = 2 * math.pi / nth
    c1, c2 = 1 / spec.r1 ** 2, 1 / spec.r2 ** 2

    def lap_periodic(u, axis):
        return (np.roll(u, 1, axis) - 2 * u + np.roll(u, -1, axis)) / hth ** 2

    def apply(x):
        u = x.reshape(nt, nth, nth)
        out = diag[:, None, None] * u
        out[1:] += off[:, None, None] * u[:-1]
        out[:-1] += off[:, None, None] * u[1:]
        out -= c1 * lap_periodic(u, 1) + c2 * lap_periodic(u, 2)
        out -= a2 * u
        return out.ravel()

    res = sparse_smallest_eigs(apply, nt * nth * nth, count=1, tol=tol, max_iter=1500, seed=seed)
    return float(res.eigenvalues[0])


# --- weighted Rayleigh quotient -------------------------------------------------


def stability_quotient(
    spec_or_spectrum,
    profiles: Mapping[int, Callable[[np.ndarray], np.ndarray]],
    eps: float,
    samples: int = 4001,
    n: int | None = None,
) -> float:
    """Q(V,V) / int |V|^2 r^-2 for V = sum_j psi_j(r) V_j(sigma).

    ``profiles`` maps a link-spectrum index j (0-based, distinct eigenvalues)
    to a radial profile psi_j supported in [eps, 1]; V_j is a unit eigensection.
    Orthogonality of the V_j splits both integrals mode by mode. Radial
    integrals use the trapezoid rule in t = log r with derivatives from
    second-order central differences.
    """
    if isinstance(spec_or_spectrum, LinkSpectrum):
        spectrum = spec_or_spectrum
        if n is None:
            raise ValueError("cone dimension n required with a bare spectrum")
    else:
        spectrum = scalar_link_spectrum(spec_or_spectrum)
        n = spec_or_spectrum.cone_dim
    t = np.linspace(math.log(eps), 0.0, samples)
    r = np.exp(t)
    weight = r ** (n - 2)
    num = den = 0.0
    for j, psi in profiles.items():
        values = np.asarray(psi(r), dtype=float)
        dpsi = np.gradient(values, t, edge_order=2)
        # r^{n-1} psi_r^2 dr = r^{n-2} psi_t^2 dt and r^{n-3} psi^2 dr = r^{n-2} psi^2 dt
        kinetic = np.trapezoid(weight * dpsi ** 2, t)
        mass = np.trapezoid(weight * values ** 2, t)
        num += kinetic + spectrum.eigenvalues[j] * mass
        den += mass
    if den <= 0:
        raise ValueError("test section is identically zero")
    return float(num / den)
