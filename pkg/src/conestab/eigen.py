"""Symmetric eigensolvers: cyclic Jacobi (dense, batched) and Lanczos (matrix-free)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# above this size the dense path hands off to LAPACK
JACOBI_MAX_DIM = 48


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _off_norm(a: np.ndarray) -> np.ndarray:
    off = a * (1.0 - np.eye(a.shape[-1]))
    return np.sqrt(np.sum(off * off, axis=(-2, -1)))


def jacobi_eig(a, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi rotations on a (batch of) symmetric matrices.

    Returns ascending eigenvalues and orthonormal eigenvector columns.
    """
    a = np.array(a, dtype=float, copy=True)
    d = a.shape[-1]
    v = np.broadcast_to(np.eye(d), a.shape).copy()
    scale = np.maximum(np.sqrt(np.sum(a * a, axis=(-2, -1))), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        if np.all(_off_norm(a) <= tol * scale):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[..., p, q]
                active = np.abs(apq) > 1e-300
                if not np.any(active):
                    continue
                safe = np.where(active, apq, 1.0)
                theta = (a[..., q, q] - a[..., p, p]) / (2.0 * safe)
                big = np.abs(theta) > 1e100
                th = np.where(big, 1.0, theta)
                t = np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0))
                t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
                t = np.where(theta == 0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                c_ = c[..., None]
                s_ = s[..., None]
                # A <- A P, then A <- P^T A, V <- V P
                ap, aq = a[..., :, p].copy(), a[..., :, q].copy()
                a[..., :, p] = c_ * ap - s_ * aq
                a[..., :, q] = s_ * ap + c_ * aq
                ap, aq = a[..., p, :].copy(), a[..., q, :].copy()
                a[..., p, :] = c_ * ap - s_ * aq
                a[..., q, :] = s_ * ap + c_ * aq
                vp, vq = v[..., :, p].copy(), v[..., :, q].copy()
                v[..., :, p] = c_ * vp - s_ * vq
                v[..., :, q] = s_ * vp + c_ * vq
    else:
        raise ConvergenceError("Jacobi sweeps exhausted", float(np.max(_off_norm(a) / scale)))
    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def sym_eig(m, method: str = "auto"):
    """Eigen-decomposition of a real symmetric matrix or a stack of them.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_DIM``).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    if method == "auto":
        method = "jacobi" if m.shape[-1] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        return jacobi_eig(m)
    if method == "lapack":
        return np.linalg.eigh(m)
    raise ValueError(f"unknown method {method!r}")


def hermitian_eigvals(h, method: str = "auto") -> np.ndarray:
    """Eigenvalues of complex Hermitian matrices via the real symmetric embedding."""
    h = np.asarray(h)
    a, b = h.real, h.imag
    big = np.concatenate(
        [np.concatenate([a, -b], axis=-1), np.concatenate([b, a], axis=-1)], axis=-2
    )
    w, _ = sym_eig(big, method=method)
    # each eigenvalue appears twice in the embedding
    return w[..., 0::2]


@dataclass
class LanczosResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    iterations: int


def sparse_smallest_eigs(
    apply: Callable[[np.ndarray], np.ndarray],
    dim: int,
    count: int = 1,
    tol: float = 1e-8,
    weights=None,
    max_iter: int | None = None,
    seed: int = 0,
) -> LanczosResult:
    """Smallest eigenvalues of a symmetric operator given only its action.

    ``weights`` is the diagonal of a mass matrix; the operator must then be
    symmetric in the weighted inner product, and the problem is symmetrized as
    W^{1/2} A W^{-1/2}. Lanczos with full reorthogonalization; Ritz pairs are
    accepted once their residual is at most ``tol`` times the spectral scale.
    """
    if count < 1 or count > dim:
        raise ValueError("count must be in [1, dim]")
    if weights is None:
        op = apply
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (dim,) or np.any(w <= 0):
            raise ValueError("weights must be a positive vector of length dim")
        sw = np.sqrt(w)
        op = lambda x: sw * apply(x / sw)
    max_iter = dim if max_iter is None else min(max_iter, dim)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    basis = np.zeros((max_iter + 1, dim))
    alpha = np.zeros(max_iter)
    beta = np.zeros(max_iter)
    basis[0] = q
    scale = 0.0
    theta = s = None
    k = 0
    for k in range(max_iter):
        wv = op(basis[k])
        alpha[k] = basis[k] @ wv
        wv = wv - alpha[k] * basis[k] - (beta[k - 1] * basis[k - 1] if k > 0 else 0.0)
        # two passes of classical Gram-Schmidt keep the basis orthogonal
        for _ in range(2):
            wv -= basis[: k + 1].T @ (basis[: k + 1] @ wv)
        beta[k] = np.linalg.norm(wv)
        m = k + 1
        check = m >= count and (m % 10 == 0 or m == max_iter or beta[k] < 1e-14 * max(scale, 1.0))
        if check:
            t = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
            theta, s = np.linalg.eigh(t)
            scale = max(scale, np.max(np.abs(theta)))
            res = np.abs(beta[k] * s[-1, :count])
            if np.all(res <= tol * max(scale, 1.0)) or beta[k] < 1e-14 * max(scale, 1.0):
                break
        if beta[k] == 0:
            break
        basis[k + 1] = wv / beta[k]
    m = k + 1
    if theta is None or theta.size != m:
        t = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
        theta, s = np.linalg.eigh(t)
    res = np.abs(beta[k] * s[-1, :count])
    vecs = basis[:m].T @ s[:, :count]
    if weights is not None:
        vecs = vecs / sw[:, None]
    scale = max(np.max(np.abs(theta)), 1.0)
    if np.any(res > tol * scale) and beta[k] >= 1e-14 * scale:
        raise ConvergenceError(f"Lanczos did not converge in {m} iterations", float(res.max() / scale))
    return LanczosResult(theta[:count].copy(), vecs, res, m)
