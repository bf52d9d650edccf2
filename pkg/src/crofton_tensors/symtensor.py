"""Dense symmetric tensors over R^n.

A rank-p tensor is stored as one coefficient per sorted multi-index
``i_1 <= ... <= i_p``; the coefficient is the value of the tensor on the
basis vectors ``(e_{i_1}, ..., e_{i_p})``.  Indices are 0-based internally
and 1-based in the CSV serialization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

POSDEF_TOL = 1e-10
UNIT_TOL = 1e-12


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    """Sorted multi-indices of length ``p`` over ``range(n)`` in lexicographic order."""
    return tuple(itertools.combinations_with_replacement(range(n), p))


@lru_cache(maxsize=None)
def _position(n: int, p: int) -> dict[tuple[int, ...], int]:
    return {idx: k for k, idx in enumerate(multi_indices(n, p))}


def n_components(n: int, p: int) -> int:
    return comb(n + p - 1, p)


@dataclass(frozen=True, eq=False)
class SymmetricTensor:
    dim: int
    rank: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim < 1 or self.rank < 0:
            raise ValueError(f"invalid dim/rank ({self.dim}, {self.rank})")
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if c.size != n_components(self.dim, self.rank):
            raise ValueError(
                f"expected {n_components(self.dim, self.rank)} coefficients, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, n: int, p: int) -> SymmetricTensor:
        return cls(n, p, np.zeros(n_components(n, p)))

    @classmethod
    def scalar(cls, value: float, n: int) -> SymmetricTensor:
        return cls(n, 0, np.array([float(value)]))

    @classmethod
    def from_array(cls, arr, check: bool = True) -> SymmetricTensor:
        """Build from a full ``(n,)*p`` array; it must already be symmetric."""
        arr = np.asarray(arr, dtype=float)
        p = arr.ndim
        n = arr.shape[0] if p else 1
        if p == 0:
            return cls.scalar(float(arr), n)
        if check:
            for perm in itertools.permutations(range(p)):
                if not np.allclose(arr, arr.transpose(perm), atol=1e-12, rtol=0):
                    raise ValueError("array is not symmetric")
        return cls(n, p, np.array([arr[idx] for idx in multi_indices(n, p)]))

    @classmethod
    def vector_power(cls, x, p: int) -> SymmetricTensor:
        """The p-fold symmetric power x^p of the rank-1 tensor z -> <z, x>."""
        x = np.asarray(x, dtype=float)
        n = x.size
        return cls(n, p, np.array([np.prod(x[list(idx)]) for idx in multi_indices(n, p)]))

    # access -------------------------------------------------------------
    def __getitem__(self, idx) -> float:
        if isinstance(idx, (int, np.integer)):
            idx = (int(idx),)
        key = tuple(sorted(int(i) for i in idx))
        if len(key) != self.rank:
            raise IndexError(f"rank-{self.rank} tensor indexed with {len(key)} indices")
        return float(self.coeffs[_position(self.dim, self.rank)[key]])

    def to_array(self) -> np.ndarray:
        if self.rank == 0:
            return np.array(self.coeffs[0])
        out = np.empty((self.dim,) * self.rank)
        pos = _position(self.dim, self.rank)
        for full in itertools.product(range(self.dim), repeat=self.rank):
            out[full] = self.coeffs[pos[tuple(sorted(full))]]
        return out

    def matrix(self) -> np.ndarray:
        if self.rank != 2:
            raise ValueError("matrix form only exists for rank 2")
        return self.to_array()

    def __call__(self, *vectors) -> float:
        if len(vectors) != self.rank:
            raise ValueError(f"rank-{self.rank} tensor evaluated on {len(vectors)} vectors")
        out = self.to_array()
        for v in vectors:
            out = np.tensordot(np.asarray(v, dtype=float), out, axes=(0, 0))
        return float(out)

    # linear structure ---------------------------------------------------
    def _check_same(self, other: SymmetricTensor):
        if (self.dim, self.rank) != (other.dim, other.rank):
            raise ValueError(
                f"shape mismatch: ({self.dim}, {self.rank}) vs ({other.dim}, {other.rank})"
            )

    def __add__(self, other: SymmetricTensor) -> SymmetricTensor:
        self._check_same(other)
        return SymmetricTensor(self.dim, self.rank, self.coeffs + other.coeffs)

    def __sub__(self, other: SymmetricTensor) -> SymmetricTensor:
        self._check_same(other)
        return SymmetricTensor(self.dim, self.rank, self.coeffs - other.coeffs)

    def __neg__(self) -> SymmetricTensor:
        return SymmetricTensor(self.dim, self.rank, -self.coeffs)

    def __mul__(self, scale: float) -> SymmetricTensor:
        return SymmetricTensor(self.dim, self.rank, self.coeffs * float(scale))

    __rmul__ = __mul__

    def __truediv__(self, scale: float) -> SymmetricTensor:
        return SymmetricTensor(self.dim, self.rank, self.coeffs / float(scale))

    def max_abs_diff(self, other: SymmetricTensor) -> float:
        self._check_same(other)
        return float(np.max(np.abs(self.coeffs - other.coeffs)))

    def allclose(self, other: SymmetricTensor, rtol=1e-9, atol=1e-12) -> bool:
        self._check_same(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"SymmetricTensor(dim={self.dim}, rank={self.rank}, coeffs={self.coeffs.tolist()})"

    # serialization ------------------------------------------------------
    def csv_rows(self) -> list[tuple[str, str]]:
        """(multi-index joined by '-', 1-based; coefficient with 17 significant digits)."""
        rows = []
        for idx, c in zip(multi_indices(self.dim, self.rank), self.coeffs):
            key = "-".join(str(i + 1) for i in idx) if idx else "0"
            rows.append((key, f"{c:.17g}"))
        return rows


@dataclass(frozen=True)
class LinearDirection:
    """A line through the origin; ``unit`` has its first nonzero coordinate positive."""

    unit: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.unit, dtype=float).reshape(-1).copy()
        norm = np.linalg.norm(u)
        if norm == 0:
            raise ValueError("zero vector does not define a direction")
        if abs(norm - 1.0) > UNIT_TOL:
            u = u / norm
        nz = np.flatnonzero(np.abs(u) > UNIT_TOL)
        if u[nz[0]] < 0:
            u = -u
        u.setflags(write=False)
        object.__setattr__(self, "unit", u)

    @property
    def dim(self) -> int:
        return self.unit.size

    @classmethod
    def from_angle(cls, phi: float) -> LinearDirection:
        return cls(np.array([np.cos(phi), np.sin(phi)]))


def _as_unit(u) -> np.ndarray:
    if isinstance(u, LinearDirection):
        return u.unit
    u = np.asarray(u, dtype=float)
    return u / np.linalg.norm(u)


@lru_cache(maxsize=None)
def _product_plan(n: int, p: int, q: int):
    """Index arrays so that (a.b)[k] = sum over plan rows of a[ia] * b[ib], divided by C(p+q, p)."""
    pos_a, pos_b = _position(n, p), _position(n, q)
    out, ia, ib = [], [], []
    for k, idx in enumerate(multi_indices(n, p + q)):
        for subset in itertools.combinations(range(p + q), p):
            rest = [i for i in range(p + q) if i not in subset]
            out.append(k)
            ia.append(pos_a[tuple(idx[i] for i in subset)])
            ib.append(pos_b[tuple(idx[i] for i in rest)])
    return np.array(out, dtype=np.intp), np.array(ia, dtype=np.intp), np.array(ib, dtype=np.intp)


def sym_product(a: SymmetricTensor, b: SymmetricTensor) -> SymmetricTensor:
    """Symmetrized tensor product of ``a`` and ``b``."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    # canonical operand order keeps a.b and b.a bit-identical (same summation order)
    if (a.rank, tuple(a.coeffs)) > (b.rank, tuple(b.coeffs)):
        a, b = b, a
    n, p, q = a.dim, a.rank, b.rank
    out, ia, ib = _product_plan(n, p, q)
    vals = np.bincount(out, weights=a.coeffs[ia] * b.coeffs[ib], minlength=n_components(n, p + q))
    return SymmetricTensor(n, p + q, vals / comb(p + q, p))


def tensor_power(t: SymmetricTensor, k: int) -> SymmetricTensor:
    if k < 0:
        raise ValueError("power must be non-negative")
    out = SymmetricTensor.scalar(1.0, t.dim)
    for _ in range(k):
        out = sym_product(out, t)
    return out


def metric_tensor(n: int) -> SymmetricTensor:
    return SymmetricTensor.from_array(np.eye(n), check=False)


def line_metric(u) -> SymmetricTensor:
    """Q(L) for the line spanned by ``u``: (x, y) -> <x, u><y, u>."""
    return SymmetricTensor.vector_power(_as_unit(u), 2)


def rank2_spectrum(t: SymmetricTensor) -> np.ndarray:
    """Ascending eigenvalues of the matrix form of a rank-2 tensor."""
    if t.rank != 2:
        raise ValueError(f"spectrum needs a rank-2 tensor, got rank {t.rank}")
    return np.linalg.eigvalsh(t.matrix())


def is_positive_definite(t: SymmetricTensor, tol: float = POSDEF_TOL) -> bool:
    return bool(rank2_spectrum(t)[0] > tol)


def rotate(t: SymmetricTensor, rot) -> SymmetricTensor:
    """The image of ``t`` under the orthogonal map ``rot``: (x_1..x_p) -> t(rot^T x_1, ...)."""
    rot = np.asarray(rot, dtype=float)
    arr = t.to_array()
    for _ in range(t.rank):
        # contract the leading axis and append the rotated one at the end
        arr = np.tensordot(arr, rot, axes=(0, 1))
    return SymmetricTensor.from_array(arr, check=False) if t.rank else t


def trace(t: SymmetricTensor) -> SymmetricTensor:
    """Contraction of two slots with the metric."""
    if t.rank < 2:
        raise ValueError("trace needs rank >= 2")
    arr = np.trace(t.to_array(), axis1=0, axis2=1)
    if t.rank == 2:
        return SymmetricTensor.scalar(float(arr), t.dim)
    return SymmetricTensor.from_array(arr, check=False)


def monomials(U: np.ndarray, p: int) -> np.ndarray:
    """Rows of products prod(u[idx]) over the sorted multi-indices of rank p; shape (N, ncomp)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    idx = multi_indices(U.shape[1], p)
    if p == 0:
        return np.ones((U.shape[0], 1))
    cols = np.array(idx, dtype=np.intp)
    return np.prod(U[:, cols], axis=2)
