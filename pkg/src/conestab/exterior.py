"""Exterior algebra on R^m with sparse multi-index coefficients.

Forms are stored as ``{increasing index tuple: coefficient}`` with zero-based
indices. ``dx`` builds basis forms from one-based labels so that written
expressions read like ``dx^{567}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_DIM = 16


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if ``seq`` has repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _canonical(terms: Iterable[tuple[Sequence[int], float]], dim: int) -> dict[tuple[int, ...], float]:
    out: dict[tuple[int, ...], float] = {}
    for idx, c in terms:
        idx = tuple(int(i) for i in idx)
        if any(i < 0 or i >= dim for i in idx):
            raise ValueError(f"index {idx} out of range for dimension {dim}")
        s = permutation_sign(idx)
        if s == 0 or c == 0:
            continue
        key = tuple(sorted(idx))
        out[key] = out.get(key, 0.0) + s * c
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True)
class KForm:
    dim: int
    degree: int
    coeffs: Mapping[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"ambient dimension {self.dim} outside [1, {MAX_DIM}]")
        if not 0 <= self.degree <= self.dim:
            raise ValueError(f"degree {self.degree} invalid for dimension {self.dim}")
        for idx, c in self.coeffs.items():
            if len(idx) != self.degree or list(idx) != sorted(set(idx)):
                raise ValueError(f"non-canonical index tuple {idx}")
            if c == 0 or not np.isfinite(c):
                raise ValueError(f"bad coefficient {c!r} at {idx}")

    @classmethod
    def from_terms(cls, dim: int, degree: int, terms) -> "KForm":
        terms = list(terms)
        for idx, _ in terms:
            if len(idx) != degree:
                raise ValueError(f"term {idx} does not have degree {degree}")
        return cls(dim, degree, _canonical(terms, dim))

    @classmethod
    def zero(cls, dim: int, degree: int) -> "KForm":
        return cls(dim, degree, {})

    # arithmetic ---------------------------------------------------------

    def _check(self, other: "KForm"):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "KForm") -> "KForm":
        self._check(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        terms = list(self.coeffs.items()) + list(other.coeffs.items())
        return KForm.from_terms(self.dim, self.degree, terms)

    def __neg__(self) -> "KForm":
        return KForm(self.dim, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def __mul__(self, scalar: float) -> "KForm":
        return KForm.from_terms(self.dim, self.degree, [(k, scalar * v) for k, v in self.coeffs.items()])

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "KForm":
        return self * (1.0 / scalar)

    def __xor__(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def is_close(self, other: "KForm", tol: float = 1e-10) -> bool:
        if self.dim != other.dim or self.degree != other.degree:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeffs.get(k, 0.0) - other.coeffs.get(k, 0.0)) <= tol for k in keys)

    def to_dense(self) -> np.ndarray:
        """Coefficient vector over ``combinations(range(dim), degree)``."""
        basis = list(combinations(range(self.dim), self.degree))
        return np.array([self.coeffs.get(b, 0.0) for b in basis])

    def __call__(self, *vectors) -> float:
        return evaluate_form(self, np.column_stack(vectors) if vectors else np.zeros((self.dim, 0)))

    def __repr__(self):
        if not self.coeffs:
            return f"KForm(dim={self.dim}, degree={self.degree}, 0)"
        parts = []
        for idx, c in sorted(self.coeffs.items()):
            label = "".join(str(i + 1) for i in idx) if self.dim < 10 else ",".join(str(i + 1) for i in idx)
            parts.append(f"{c:+g} dx^{{{label}}}")
        return f"KForm(dim={self.dim}: " + " ".join(parts) + ")"


def dx(dim: int, *labels: int) -> KForm:
    """Basis form dx^{i}^...^dx^{k} from one-based labels."""
    return KForm.from_terms(dim, len(labels), [(tuple(i - 1 for i in labels), 1.0)])


def wedge(a: KForm, b: KForm) -> KForm:
    a._check(b)
    if a.degree + b.degree > a.dim:
        raise ValueError(f"degree {a.degree + b.degree} exceeds dimension {a.dim}")
    terms = [(ia + ib, ca * cb) for ia, ca in a.coeffs.items() for ib, cb in b.coeffs.items()]
    return KForm.from_terms(a.dim, a.degree + b.degree, terms)


def hodge_star(a: KForm, orientation: int = 1) -> KForm:
    """Euclidean Hodge star; ``orientation=-1`` reverses the volume form."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    full = set(range(a.dim))
    terms = []
    for idx, c in a.coeffs.items():
        comp = tuple(sorted(full - set(idx)))
        terms.append((comp, orientation * permutation_sign(idx + comp) * c))
    return KForm.from_terms(a.dim, a.dim - a.degree, terms)


def interior_product(v, a: KForm) -> KForm:
    v = np.asarray(v, dtype=float)
    if v.shape != (a.dim,):
        raise ValueError(f"vector of shape {v.shape} does not match dimension {a.dim}")
    if a.degree == 0:
        return KForm.zero(a.dim, 0)
    terms = []
    for idx, c in a.coeffs.items():
        for pos, i in enumerate(idx):
            if v[i] != 0:
                terms.append((idx[:pos] + idx[pos + 1:], (-1) ** pos * v[i] * c))
    return KForm.from_terms(a.dim, a.degree - 1, terms)


def evaluate_form(a: KForm, frame) -> float | np.ndarray:
    """Evaluate on the columns of ``frame`` (shape (m, k) or batched (..., m, k))."""
    frame = np.asarray(frame, dtype=float)
    if frame.shape[-2:] != (a.dim, a.degree):
        raise ValueError(f"frame shape {frame.shape} does not fit a {a.degree}-form on R^{a.dim}")
    if a.degree == 0:
        return np.full(frame.shape[:-2], sum(a.coeffs.values()) if a.coeffs else 0.0)[()]
    total = np.zeros(frame.shape[:-2])
    for idx, c in a.coeffs.items():
        total = total + c * np.linalg.det(frame[..., list(idx), :])
    return total[()] if total.ndim == 0 else total


def flat(v, metric=None) -> KForm:
    v = np.asarray(v, dtype=float)
    g = np.eye(v.size) if metric is None else _check_metric(metric, v.size)
    w = g @ v
    return KForm.from_terms(v.size, 1, [((i,), float(w[i])) for i in range(v.size)])


def sharp(a: KForm, metric=None) -> np.ndarray:
    if a.degree != 1:
        raise ValueError("sharp is defined on 1-forms")
    g = np.eye(a.dim) if metric is None else _check_metric(metric, a.dim)
    return np.linalg.solve(g, a.to_dense())


def _check_metric(metric, m: int) -> np.ndarray:
    g = np.asarray(metric, dtype=float)
    if g.shape != (m, m) or not np.allclose(g, g.T):
        raise ValueError("metric must be a symmetric m x m matrix")
    if np.linalg.eigvalsh(g).min() <= 0:
        raise ValueError("metric is not positive definite")
    return g


class ComplexStructure:
    """Standard J on C^n with real coordinates interleaved (x1, y1, x2, y2, ...)."""

    def __init__(self, n: int):
        self.n = n
        J = np.zeros((2 * n, 2 * n))
        for j in range(n):
            J[2 * j + 1, 2 * j] = 1.0
            J[2 * j, 2 * j + 1] = -1.0
        self.matrix = J

    def __call__(self, v):
        return np.asarray(v) @ self.matrix.T

    def kahler_form(self) -> KForm:
        return KForm.from_terms(2 * self.n, 2, [((2 * j, 2 * j + 1), 1.0) for j in range(self.n)])


def to_complex(v) -> np.ndarray:
    """Interleaved real coordinates -> complex vector (last axis)."""
    v = np.asarray(v)
    return v[..., 0::2] + 1j * v[..., 1::2]


def to_real(z) -> np.ndarray:
    z = np.asarray(z)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out
