"""Homogeneous forms on cones over flat tori.

A form on T^d = (R / 2 pi Z)^d is stored as complex Fourier coefficients of
shape (K, C(d, p)) over the modes |k_i| <= kappa, one column per increasing
index tuple. d is i k ^, its L2 adjoint delta is -i iota_k, and the Hodge star
is the constant Euclidean one with orientation d theta_1 ^ ... ^ d theta_d.

Cone-level identities are checked against a separate product-grid path:
samples on an r x T^d grid, FFT derivatives in the angles and fourth-order
central differences in r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product

import numpy as np

from .eigen import hermitian_eigvals, sym_eig
from .exterior import KForm, hodge_star, wedge

MAX_TORUS_DIM = 7


class UnsupportedOperation(ValueError):
    pass


def _basis(d: int, p: int) -> list[tuple[int, ...]]:
    return list(combinations(range(d), p))


def _wedge_matrix(d: int, p: int, j: int) -> np.ndarray:
    """Matrix of d theta_j ^ (.) from p-forms to (p+1)-forms."""
    src, dst = _basis(d, p), _basis(d, p + 1)
    index = {b: i for i, b in enumerate(dst)}
    mat = np.zeros((len(dst), len(src)))
    ej = KForm.from_terms(d, 1, [((j,), 1.0)])
    for col, b in enumerate(src):
        if j in b:
            continue
        w = wedge(ej, KForm.from_terms(d, p, [(b, 1.0)]))
        for idx, c in w.coeffs.items():
            mat[index[idx], col] = c
    return mat


def _star_matrix(d: int, p: int) -> np.ndarray:
    src, dst = _basis(d, p), _basis(d, d - p)
    index = {b: i for i, b in enumerate(dst)}
    mat = np.zeros((len(dst), len(src)))
    for col, b in enumerate(src):
        s = hodge_star(KForm.from_terms(d, p, [(b, 1.0)])) if p > 0 else hodge_star(KForm(d, 0, {(): 1.0}))
        for idx, c in s.coeffs.items():
            mat[index[idx], col] = c
    return mat


@dataclass(frozen=True)
class FourierTorus:
    """Flat T^d with Fourier-exact exterior calculus; d = 1 is the circle."""

    d: int = 3
    kappa: int = 8

    def __post_init__(self):
        if not 1 <= self.d <= MAX_TORUS_DIM:
            raise ValueError(f"torus dimension must be in [1, {MAX_TORUS_DIM}]")
        if self.kappa < 1:
            raise ValueError("mode cutoff must be >= 1")

    @cached_property
    def modes(self) -> np.ndarray:
        r = range(-self.kappa, self.kappa + 1)
        return np.array(list(product(r, repeat=self.d)), dtype=float)

    @cached_property
    def negation(self) -> np.ndarray:
        """Index of -k for each mode k (the list is symmetric)."""
        return np.arange(len(self.modes))[::-1]

    @property
    def num_modes(self) -> int:
        return len(self.modes)

    def rank(self, p: int) -> int:
        return math.comb(self.d, p)

    @cached_property
    def _wedges(self) -> dict[int, np.ndarray]:
        # (d, out, in) stacks for each source degree
        return {p: np.stack([_wedge_matrix(self.d, p, j) for j in range(self.d)]) for p in range(self.d)}

    @cached_property
    def _symbols(self) -> dict[int, np.ndarray]:
        # per-mode matrix sum_j k_j (d theta_j ^ .), shape (K, out, in)
        return {p: np.einsum("kj,jab->kab", self.modes, w) for p, w in self._wedges.items()}

    @cached_property
    def _stars(self) -> dict[int, np.ndarray]:
        return {p: _star_matrix(self.d, p) for p in range(self.d + 1)}

    def _check(self, a, p):
        a = np.asarray(a)
        if not 0 <= p <= self.d or a.shape[-2:] != (self.num_modes, self.rank(p)):
            raise ValueError(f"expected coefficients of shape (..., {self.num_modes}, {self.rank(p)}) for degree {p}")
        return a

    def ext_d(self, a, p: int) -> np.ndarray:
        a = self._check(a, p)
        if p == self.d:
            return np.zeros(a.shape[:-1] + (0,), dtype=complex)
        return 1j * np.einsum("kab,...kb->...ka", self._symbols[p], a)

    def codiff(self, a, p: int) -> np.ndarray:
        a = self._check(a, p)
        if p == 0:
            return np.zeros(a.shape[:-1] + (0,), dtype=complex)
        return -1j * np.einsum("kba,...kb->...ka", self._symbols[p - 1], a)

    def star(self, a, p: int) -> np.ndarray:
        a = self._check(a, p)
        return np.einsum("ab,...kb->...ka", self._stars[p], a)

    def laplacian(self, a, p: int) -> np.ndarray:
        out = np.zeros(np.shape(a), dtype=complex)
        if p < self.d:
            out = out + self.codiff(self.ext_d(a, p), p + 1)
        if p > 0:
            out = out + self.ext_d(self.codiff(a, p), p - 1)
        return out

    def inner(self, a, b) -> complex:
        return complex((2 * math.pi) ** self.d * np.sum(a * np.conj(b)))

    def norm(self, a) -> float:
        return math.sqrt(max(self.inner(a, a).real, 0.0))

    def blocks(self, op, p: int, q: int) -> np.ndarray:
        """Per-mode matrices (K, rank q, rank p) of a mode-diagonal operator."""
        K, rp = self.num_modes, self.rank(p)
        out = np.zeros((K, self.rank(q), rp), dtype=complex)
        for i in range(rp):
            e = np.zeros((K, rp), dtype=complex)
            e[:, i] = 1.0
            out[:, :, i] = op(e)
        return out

    def random_form(self, rng, p: int, real: bool = True, decay: float = 1.0) -> np.ndarray:
        shape = (self.num_modes, self.rank(p))
        a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        a /= (1.0 + np.sum(self.modes ** 2, axis=1, keepdims=True)) ** (decay / 2)
        if real:
            a = 0.5 * (a + np.conj(a[self.negation]))
        return a

    def mode_index(self, k) -> int:
        k = np.asarray(k, dtype=float)
        hits = np.nonzero(np.all(self.modes == k, axis=1))[0]
        if not len(hits):
            raise ValueError(f"mode {k} outside the cutoff")
        return int(hits[0])

    def to_grid(self, a, M: int) -> np.ndarray:
        """Values on the uniform M^d angle grid, shape (M,)*d + (rank,)."""
        if M < 2 * self.kappa + 1:
            raise ValueError("grid too coarse for the mode cutoff")
        a = np.asarray(a)
        spec = np.zeros((M,) * self.d + (a.shape[-1],), dtype=complex)
        idx = tuple((self.modes[:, j].astype(int)) % M for j in range(self.d))
        spec[idx] = a
        axes = tuple(range(self.d))
        return np.fft.ifftn(spec, axes=axes) * M ** self.d

    def to_json(self) -> dict:
        return {"type": "FourierTorus", "d": self.d, "kappa": self.kappa}


def SphereS1(kappa: int = 8) -> FourierTorus:
    return FourierTorus(1, kappa)


# --- grid oracles -----------------------------------------------------------------


def _grid_angle_derivative(values: np.ndarray, axis: int, d: int) -> np.ndarray:
    M = values.shape[axis]
    k = np.fft.fftfreq(M, 1.0 / M)
    shape = [1] * values.ndim
    shape[axis] = M
    spec = np.fft.fft(values, axis=axis) * (1j * k.reshape(shape))
    return np.fft.ifft(spec, axis=axis)


def _radial_derivative(fn, r: float, h: float) -> np.ndarray:
    return (-fn(r + 2 * h) + 8 * fn(r + h) - 8 * fn(r - h) + fn(r - 2 * h)) / (12 * h)


# --- homogeneous 1-forms --------------------------------------------------------------


@dataclass
class HomogeneousOneForm:
    """alpha = r^lam eta dr + r^{lam+1} omega on the cone over a Fourier torus."""

    link: FourierTorus
    lam: float
    eta: np.ndarray  # (K, 1)
    omega: np.ndarray  # (K, d)

    def grid(self, r: float, M: int) -> tuple[np.ndarray, np.ndarray]:
        return (
            r ** self.lam * self.link.to_grid(self.eta, M)[..., 0],
            r ** (self.lam + 1) * self.link.to_grid(self.omega, M),
        )


def fhn_residuals(alpha: HomogeneousOneForm, n: int | None = None) -> tuple[float, float, float]:
    """Norms of d eta - (lam+1) omega, d omega and delta omega - (lam+n-1) eta."""
    L = alpha.link
    n = L.d + 1 if n is None else n
    lam = alpha.lam
    r1 = L.ext_d(alpha.eta, 0) - (lam + 1) * alpha.omega
    r2 = L.ext_d(alpha.omega, 1)
    r3 = L.codiff(alpha.omega, 1) - (lam + n - 1) * alpha.eta
    return L.norm(r1), L.norm(r2), L.norm(r3)


def cone_oneform_residuals(alpha: HomogeneousOneForm, radii=(0.5, 1.0, 2.0), M: int | None = None, h: float = 1e-3) -> tuple[float, float]:
    """Relative sup-norms of d alpha and delta alpha on an r x T^d product grid."""
    L = alpha.link
    d = L.d
    M = 2 * L.kappa + 1 if M is None else M
    scale = 0.0
    d_res = delta_res = 0.0
    for r in radii:
        ar, aw = alpha.grid(r, M)
        scale = max(scale, float(np.max(np.abs(ar))), float(np.max(np.abs(aw))))
        dr_aw = _radial_derivative(lambda s: alpha.grid(s, M)[1], r, h * r)
        dr_flux = _radial_derivative(lambda s: s ** d * alpha.grid(s, M)[0], r, h * r)
        for j in range(d):
            # (r, j) component: d_r alpha_j - d_j alpha_r
            c = dr_aw[..., j] - _grid_angle_derivative(ar, j, d)
            d_res = max(d_res, float(np.max(np.abs(c))))
            for i in range(j):
                c = _grid_angle_derivative(aw[..., j], i, d) - _grid_angle_derivative(aw[..., i], j, d)
                d_res = max(d_res, float(np.max(np.abs(c))))
        div = dr_flux / r ** d + sum(_grid_angle_derivative(aw[..., j], j, d) for j in range(d)) / r ** 2
        delta_res = max(delta_res, float(np.max(np.abs(div))))
    scale = max(scale, 1e-300)
    return d_res / scale, delta_res / scale


def hodge_eigenvalue_of_homogeneity(lam: float, n: int) -> float:
    return (lam + 1) * (lam + n - 1)


def homogeneity_for_eigenvalue(mu: float, n: int) -> float:
    """The root lam >= -(n)/2 of (lam+1)(lam+n-1) = mu."""
    return (-n + math.sqrt((n - 2) ** 2 + 4 * mu)) / 2


def eigenmode_solution(link: FourierTorus, k, n: int | None = None, phase: float = 0.0) -> HomogeneousOneForm:
    """Closed and co-closed form built from the real eigenfunction cos(k.theta + phase)."""
    n = link.d + 1 if n is None else n
    k = np.asarray(k, dtype=float)
    mu = float(k @ k)
    lam = homogeneity_for_eigenvalue(mu, n)
    if abs(lam + 1) < 1e-12:
        raise ValueError("eigenvalue gives lam = -1; use harmonic forms instead")
    eta = np.zeros((link.num_modes, 1), dtype=complex)
    eta[link.mode_index(k), 0] += 0.5 * np.exp(1j * phase)
    eta[link.mode_index(-k), 0] += 0.5 * np.exp(-1j * phase)
    omega = link.ext_d(eta, 0) / (lam + 1)
    return HomogeneousOneForm(link, lam, eta, omega)


# --- obstruction ---------------------------------------------------------------------


@dataclass
class HodgeCheck:
    degree: int
    min_eigenvalue: float
    kernel_dim: int
    spectral_gap: float

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "min_eigenvalue": self.min_eigenvalue,
            "kernel_dim": self.kernel_dim,
            "spectral_gap": self.spectral_gap,
        }


def hodge_spectrum(link: FourierTorus, p: int, shift: float = 0.0) -> np.ndarray:
    """All eigenvalues of Delta + shift on p-forms, from the assembled d/delta blocks."""
    blocks = link.blocks(lambda a: link.laplacian(a, p), p, p) + shift * np.eye(link.rank(p))
    return np.sort(hermitian_eigvals(blocks).ravel())


def hodge_psd_check(link: FourierTorus, p: int = 1, shift: float = 0.0, tol: float = 1e-10) -> HodgeCheck:
    w = hodge_spectrum(link, p, shift)
    zero = np.abs(w) <= tol
    positive = w[w > tol]
    return HodgeCheck(p, float(w[0]), int(zero.sum()), float(positive[0]) if len(positive) else math.inf)


@dataclass
class ObstructionReport:
    link: dict
    n: int
    lam: float
    required_eigenvalue: float
    verdict: str
    witness_modes: list = field(default_factory=list)
    min_hodge_eigenvalue: float = 0.0
    witness_residuals: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "link": self.link,
            "n": self.n,
            "lambda": self.lam,
            "required_eigenvalue": self.required_eigenvalue,
            "verdict": self.verdict,
            "witness_modes": self.witness_modes,
            "witness_residuals": self.witness_residuals,
            "min_hodge_eigenvalue": self.min_hodge_eigenvalue,
        }


def critical_oneform_obstruction(link: FourierTorus, n: int, tol: float = 1e-10) -> ObstructionReport:
    """Search for closed, co-closed 1-forms of homogeneity (2-n)/2 on the cone.

    Solutions need eta in the (lam+1)(lam+n-1) eigenspace of the function
    Laplacian and omega = d eta / (lam+1); at lam = -1 eta must vanish and
    omega is any harmonic 1-form.
    """
    if n < 4:
        raise UnsupportedOperation("the critical-homogeneity analysis needs n >= 4")
    lam = (2 - n) / 2
    target = hodge_eigenvalue_of_homogeneity(lam, n)
    spec0 = hodge_spectrum(link, 0)
    witnesses, residuals = [], []
    if abs(lam + 1) < 1e-14:
        blocks = link.blocks(lambda a: link.laplacian(a, 1), 1, 1)
        w, v = np.linalg.eigh(blocks)
        for ki, k in enumerate(link.modes):
            for col in np.nonzero(np.abs(w[ki]) <= tol)[0]:
                omega = np.zeros((link.num_modes, link.d), dtype=complex)
                omega[ki] = v[ki, :, col]
                alpha = HomogeneousOneForm(link, lam, np.zeros((link.num_modes, 1), dtype=complex), omega)
                witnesses.append({"k": k.astype(int).tolist(), "omega": np.round(v[ki, :, col].real, 12).tolist()})
                residuals.append(max(fhn_residuals(alpha, n)))
    else:
        hits = np.nonzero(np.abs(np.sum(link.modes ** 2, axis=1) - target) <= tol)[0]
        for ki in hits:
            witnesses.append({"k": link.modes[ki].astype(int).tolist(), "eigenvalue": target})
    verdict = "WitnessFound" if witnesses else "NoneExists"
    return ObstructionReport(link.to_json(), n, lam, target, verdict, witnesses, float(spec0[0]), residuals)


# --- 2-forms on the cone over T^3 -----------------------------------------------------


@dataclass
class HomogeneousTwoForm:
    """alpha = dr ^ eta + r omega on the 4-dimensional cone over T^3."""

    link: FourierTorus
    eta: np.ndarray  # (K, 3)
    omega: np.ndarray  # (K, 3), basis (01, 02, 12)

    def __post_init__(self):
        if self.link.d != 3:
            raise ValueError("two-form decomposition is set up for 3-dimensional links")


def cone_d_2form(alpha: HomogeneousTwoForm) -> dict:
    """Pieces of d alpha = -dr ^ d eta + dr ^ omega + r d omega."""
    L = alpha.link
    return {"d_eta": L.ext_d(alpha.eta, 1), "omega": alpha.omega, "d_omega": L.ext_d(alpha.omega, 2)}


def cone_star_2form(alpha: HomogeneousTwoForm) -> dict:
    """Pieces of *alpha = dr ^ *omega + r *eta."""
    L = alpha.link
    return {"star_omega": L.star(alpha.omega, 2), "star_eta": L.star(alpha.eta, 1)}


_PAIRS3 = _basis(3, 2)
_PAIRS4 = _basis(4, 2)
_TRIPLES4 = _basis(4, 3)
_STAR4 = _star_matrix(4, 2)


def _grid_twoform(alpha: HomogeneousTwoForm, r: float, M: int) -> np.ndarray:
    """Coordinate components on (r, th1, th2, th3), basis pairs of range(4)."""
    eta = alpha.link.to_grid(alpha.eta, M)
    om = alpha.link.to_grid(alpha.omega, M)
    out = np.zeros(eta.shape[:-1] + (6,), dtype=complex)
    for c, (a, b) in enumerate(_PAIRS4):
        if a == 0:
            out[..., c] = eta[..., b - 1]
        else:
            out[..., c] = r * om[..., _PAIRS3.index((a - 1, b - 1))]
    return out


def _formula_d(alpha: HomogeneousTwoForm, r: float, M: int) -> np.ndarray:
    pieces = cone_d_2form(alpha)
    L = alpha.link
    d_eta = L.to_grid(pieces["d_eta"], M)
    om = L.to_grid(pieces["omega"], M)
    d_om = L.to_grid(pieces["d_omega"], M)
    out = np.zeros(d_eta.shape[:-1] + (4,), dtype=complex)
    for c, (a, b, e) in enumerate(_TRIPLES4):
        if a == 0:
            i = _PAIRS3.index((b - 1, e - 1))
            out[..., c] = -d_eta[..., i] + om[..., i]
        else:
            out[..., c] = r * d_om[..., 0]
    return out


def _formula_star(alpha: HomogeneousTwoForm, r: float, M: int) -> np.ndarray:
    pieces = cone_star_2form(alpha)
    L = alpha.link
    s_om = L.to_grid(pieces["star_omega"], M)
    s_eta = L.to_grid(pieces["star_eta"], M)
    out = np.zeros(s_om.shape[:-1] + (6,), dtype=complex)
    for c, (a, b) in enumerate(_PAIRS4):
        if a == 0:
            out[..., c] = s_om[..., b - 1]
        else:
            out[..., c] = r * s_eta[..., _PAIRS3.index((a - 1, b - 1))]
    return out


def twoform_grid_oracle(alpha: HomogeneousTwoForm, radii=(0.5, 1.0, 2.0), M: int | None = None, h: float = 1e-3) -> dict:
    """Max relative mismatch of the d and * decompositions against grid computations.

    d alpha: FFT in the angles, finite differences in r. *alpha: pointwise
    Euclidean star after rescaling to the orthonormal coframe (dr, r dth_i).
    """
    L = alpha.link
    M = 2 * L.kappa + 1 if M is None else M
    d_err = s_err = scale = 0.0
    for r in radii:
        comp = _grid_twoform(alpha, r, M)
        scale = max(scale, float(np.max(np.abs(comp))))
        drc = _radial_derivative(lambda s: _grid_twoform(alpha, s, M), r, h * r)

        def partial(axis, c):
            return drc[..., c] if axis == 0 else _grid_angle_derivative(comp[..., c], axis - 1, 3)

        grid_d = np.zeros(comp.shape[:-1] + (4,), dtype=complex)
        for t, (a, b, e) in enumerate(_TRIPLES4):
            grid_d[..., t] = (
                partial(a, _PAIRS4.index((b, e))) - partial(b, _PAIRS4.index((a, e))) + partial(e, _PAIRS4.index((a, b)))
            )
        d_err = max(d_err, float(np.max(np.abs(grid_d - _formula_d(alpha, r, M)))))
        # orthonormal rescaling: each angular index carries a factor r
        weight = np.array([r ** sum(1 for i in pair if i > 0) for pair in _PAIRS4])
        on = comp / weight
        star_on = np.einsum("ab,...b->...a", _STAR4, on)
        grid_star = star_on * weight
        s_err = max(s_err, float(np.max(np.abs(grid_star - _formula_star(alpha, r, M)))))
    scale = max(scale, 1e-300)
    return {"d_mismatch": d_err / scale, "star_mismatch": s_err / scale}


def asd_closed_reduction(alpha: HomogeneousTwoForm, tol: float = 1e-8) -> dict:
    """Residuals of omega = d eta, *eta = -omega and d eta = -*eta."""
    L = alpha.link
    d_eta = L.ext_d(alpha.eta, 1)
    s_eta = L.star(alpha.eta, 1)
    scale = max(L.norm(alpha.eta), L.norm(alpha.omega), 1e-300)
    res = {
        "closed": L.norm(alpha.omega - d_eta) / scale,
        "closed_top": L.norm(L.ext_d(alpha.omega, 2)) / scale,
        "anti_self_dual": L.norm(s_eta + alpha.omega) / scale,
        "beltrami": L.norm(d_eta + s_eta) / scale,
    }
    if L.norm(alpha.eta) == 0 and L.norm(alpha.omega) == 0:
        res = {k: 0.0 for k in res}
    res["valid"] = all(v <= tol for v in res.values())
    return res


def beltrami_field(link: FourierTorus, eigen: int = -1) -> np.ndarray:
    """cos th3 d th1 - eigen * sin th3 d th2, a solution of *d eta = eigen * eta."""
    if link.d != 3:
        raise ValueError("Beltrami fields are built on T^3")
    if eigen not in (1, -1):
        raise ValueError("eigen must be +1 or -1")
    eta = np.zeros((link.num_modes, 3), dtype=complex)
    kp, km = link.mode_index((0, 0, 1)), link.mode_index((0, 0, -1))
    eta[kp, 0] += 0.5
    eta[km, 0] += 0.5
    # sin th3 = (e^{i th3} - e^{-i th3}) / 2i
    eta[kp, 1] += -eigen / 2j
    eta[km, 1] += eigen / 2j
    return eta


def curl(link: FourierTorus, eta) -> np.ndarray:
    return link.star(link.ext_d(eta, 1), 2)


def curl_spectrum(link: FourierTorus) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of *d on coclosed 1-forms over nonzero modes, with |k| per eigenvalue."""
    if link.d != 3:
        raise ValueError("curl needs a 3-dimensional link")
    if link.kappa < 2:
        raise ValueError("use a mode cutoff of at least 2")
    blocks = link.blocks(lambda a: curl(link, a), 1, 1)
    nz = np.sum(link.modes ** 2, axis=1) > 0
    k = link.modes[nz]
    # orthonormal basis of the plane orthogonal to k
    khat = k / np.linalg.norm(k, axis=1, keepdims=True)
    _, _, vt = np.linalg.svd(khat[:, None, :])
    plane = np.swapaxes(vt[:, 1:, :], -1, -2)  # (K, 3, 2)
    restricted = np.swapaxes(plane, -1, -2) @ blocks[nz] @ plane
    w = hermitian_eigvals(restricted)
    kk = np.repeat(np.linalg.norm(k, axis=1)[:, None], 2, axis=1)
    order = np.argsort(w.ravel(), kind="stable")
    return w.ravel()[order], kk.ravel()[order]


# --- sign conventions for the codifferential -----------------------------------------------


def adjoint_sign(dim: int, p: int) -> int:
    """delta = sign * *d* on p-forms of a Riemannian dim-manifold, for delta = d^*."""
    return (-1) ** (dim * (p + 1) + 1)


def codiff_by_convention(link: FourierTorus, a, p: int, convention: str) -> np.ndarray:
    """delta = s *d* with s = -1 uniformly ("uniform") or the adjoint sign ("adjoint")."""
    if convention == "uniform":
        s = -1
    elif convention == "adjoint":
        s = adjoint_sign(link.d, p)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return s * link.star(link.ext_d(link.star(a, p), link.d - p), link.d - p + 1)


def neg1_ledger(link: FourierTorus, eta=None, samples: int = 50, seed: int = 0) -> dict:
    """Evaluate Delta eta = d delta eta + delta d eta for a curl -1 field under both sign conventions.

    Also records which convention agrees with the L2 adjoint of d on random
    1- and 2-forms.
    """
    if link.d != 3:
        raise ValueError("ledger is set up for 3-dimensional links")
    eta = beltrami_field(link) if eta is None else np.asarray(eta)
    rng = np.random.default_rng(seed)
    table = {}
    beltrami_res = link.norm(curl(link, eta) + eta)
    scale = max(link.norm(eta), 1e-300)
    direct = link.laplacian(eta, 1)
    for conv in ("uniform", "adjoint"):
        chain = link.ext_d(codiff_by_convention(link, eta, 1, conv), 0) + codiff_by_convention(
            link, link.ext_d(eta, 1), 2, conv
        )
        adj = []
        for p in (1, 2):
            worst = 0.0
            for _ in range(samples):
                a = link.random_form(rng, p - 1)
                b = link.random_form(rng, p)
                lhs = link.inner(link.ext_d(a, p - 1), b)
                rhs = link.inner(a, codiff_by_convention(link, b, p, conv))
                worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1.0))
            adj.append(worst)
        table[conv] = {
            "delta_signs": {"1-forms": -1 if conv == "uniform" else adjoint_sign(3, 1), "2-forms": -1 if conv == "uniform" else adjoint_sign(3, 2)},
            "chain_over_eta": _ratio(link, chain, eta),
            "adjoint_mismatch_1forms": adj[0],
            "adjoint_mismatch_2forms": adj[1],
            "adjointness_consistent": max(adj) <= 1e-10,
        }
    return {
        "link": link.to_json(),
        "vacuous": link.norm(eta) == 0,
        "beltrami_residual": beltrami_res / scale,
        "direct_laplacian_over_eta": _ratio(link, direct, eta),
        "convention_table": table,
        "seed": seed,
    }


def _ratio(link: FourierTorus, a, eta) -> float | None:
    """c with a = c eta (least squares), or None when eta vanishes."""
    den = link.inner(eta, eta).real
    if den == 0:
        return None
    return float(link.inner(a, eta).real / den)
