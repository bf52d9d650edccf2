"""Constants of the linear Crofton formula for surface tensors and its inversion.

Notation: ``c_coeff(m, k)`` are the coefficients in front of
``Q^{m-k} Phi_{n-1,0,2k}`` in the Crofton integral of the rank-2m relative
tensor, ``C_normalizer(j, n)`` the scalar prefactor that turns that integral
into the lower-triangular system, and ``d_matrix`` its inverse.  The
measurement function ``G_s`` combines them so that integrating
``G_s(direction) * V_0(K cap E)`` over all lines returns ``Phi_{n-1,0,s}(K)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, lgamma, log, pi, exp, sqrt

import numpy as np

from .symtensor import (
    SymmetricTensor,
    LinearDirection,
    line_metric,
    metric_tensor,
    monomials,
    multi_indices,
    n_components,
    sym_product,
    tensor_power,
)


def omega(n: float) -> float:
    """Surface area of the unit sphere in R^n, 2 pi^{n/2} / Gamma(n/2)."""
    if n <= 0:
        raise ValueError("omega needs n > 0")
    return exp(log(2.0) + 0.5 * n * log(pi) - lgamma(0.5 * n))


def kappa(n: float) -> float:
    """Volume of the unit ball in R^n."""
    if n < 0:
        raise ValueError("kappa needs n >= 0")
    return exp(0.5 * n * log(pi) - lgamma(0.5 * n + 1.0))


def c_coeff(m: int, k: int) -> float:
    if not 0 <= k <= m:
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")
    return (-1) ** k * comb(m, k) * factorial(2 * k) * omega(2 * k + 1) / (1 - 2 * k)


def C_normalizer(j: int, n: int) -> float:
    if j < 0 or j % 2:
        raise ValueError(f"C_j is defined for even j >= 0, got {j}")
    return pi * factorial(j) * omega(j + 1) ** 2 * omega(n) / (2.0 * omega(n + j + 1))


def c_matrix(m_max: int) -> np.ndarray:
    """Scalar lower-triangular matrix with entries c_coeff(i, j) (powers of Q stripped)."""
    c = np.zeros((m_max + 1, m_max + 1))
    for i in range(m_max + 1):
        for j in range(i + 1):
            c[i, j] = c_coeff(i, j)
    return c


@lru_cache(maxsize=None)
def _d_matrix(m_max: int) -> np.ndarray:
    c = c_matrix(m_max)
    d = np.zeros_like(c)
    for i in range(m_max + 1):
        d[i, i] = 1.0 / c[i, i]
        for j in range(i):
            d[i, j] = -sum(c[i, k] * d[k, j] for k in range(j, i)) / c[i, i]
    d.setflags(write=False)
    return d


def d_matrix(s: int) -> np.ndarray:
    """Inverse of the scalar c-system for even rank ``s``, via the forward recursion."""
    if s < 0 or s % 2:
        raise ValueError(f"s must be even and non-negative, got {s}")
    return _d_matrix(s // 2)


@dataclass(frozen=True)
class CroftonTable:
    dim: int
    rank: int
    c: np.ndarray = field(repr=False)
    Cconst: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n: int, s: int) -> CroftonTable:
        if s % 2:
            raise ValueError("odd rank has no line Crofton measurement function")
        m = s // 2
        return cls(
            dim=n,
            rank=s,
            c=c_matrix(m),
            Cconst=np.array([C_normalizer(2 * j, n) for j in range(m + 1)]),
            d=d_matrix(s).copy(),
        )

    def g_weights(self) -> np.ndarray:
        """Scalar weights w_j with G_s = sum_j w_j Q^{m-j} Q(L)^j."""
        m = self.rank // 2
        return np.array(
            [
                2.0 * self.d[m, j] * self.Cconst[j] / (factorial(2 * j) * omega(2 * j + 1))
                for j in range(m + 1)
            ]
        )


def crofton_prefactor(n: int, s: int) -> float:
    """2 omega_{n+s+1} / (pi s! omega_{s+1}^2 omega_n), i.e. 1 / C_s."""
    return 1.0 / C_normalizer(s, n)


def crofton_rhs(n: int, s: int, tensors: dict[int, SymmetricTensor]) -> SymmetricTensor:
    """Right-hand side of the linear Crofton formula given Phi_{n-1,0,2k} for k <= s/2."""
    m = s // 2
    Q = metric_tensor(n)
    out = SymmetricTensor.zeros(n, s)
    for k in range(m + 1):
        out = out + c_coeff(m, k) * sym_product(tensor_power(Q, m - k), tensors[2 * k])
    return out * crofton_prefactor(n, s)


def G_s(u, n: int, s: int) -> SymmetricTensor:
    """Measurement function for the line spanned by ``u``."""
    if s % 2:
        raise ValueError("G_s exists only for even s")
    u = u if isinstance(u, LinearDirection) else LinearDirection(u)
    if u.dim != n:
        raise ValueError(f"direction has dim {u.dim}, expected {n}")
    w = CroftonTable.build(n, s).g_weights()
    m = s // 2
    Q, QL = metric_tensor(n), line_metric(u)
    out = SymmetricTensor.zeros(n, s)
    for j in range(m + 1):
        out = out + w[j] * sym_product(tensor_power(Q, m - j), tensor_power(QL, j))
    return out


@lru_cache(maxsize=None)
def _g_linear_map(n: int, s: int) -> tuple[np.ndarray, ...]:
    """Per j, the matrix sending monomials u^{2j} to components of Q^{m-j} u^{2j}."""
    m = s // 2
    Q = metric_tensor(n)
    maps = []
    for j in range(m + 1):
        Qp = tensor_power(Q, m - j)
        cols = []
        for k in range(n_components(n, 2 * j)):
            e = np.zeros(n_components(n, 2 * j))
            e[k] = 1.0
            cols.append(sym_product(Qp, SymmetricTensor(n, 2 * j, e)).coeffs)
        maps.append(np.array(cols).T)
    return tuple(maps)


def G_batch(U: np.ndarray, s: int) -> np.ndarray:
    """G_s components for each row of ``U`` (unit vectors, shape (N, n)); shape (N, ncomp)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    n = U.shape[1]
    w = CroftonTable.build(n, s).g_weights()
    maps = _g_linear_map(n, s)
    out = np.zeros((U.shape[0], n_components(n, s)))
    for j, A in enumerate(maps):
        out += w[j] * (monomials(U, 2 * j) @ A.T)
    return out


def g_components(n: int, s: int) -> tuple[tuple[int, ...], ...]:
    return multi_indices(n, s)


# exact identities ---------------------------------------------------------

def _half_binom(n: int, j: int) -> Fraction:
    """binom(n - 1/2, j) as an exact rational."""
    out = Fraction(1)
    for i in range(j):
        out *= Fraction(2 * n - 1 - 2 * i, 2)
    return out / factorial(j)


def lemma32_check(n: int, m: int) -> Fraction:
    """LHS minus RHS of the alternating binomial identity used for the constants; exactly 0."""
    if n < 0 or m < 0:
        raise ValueError("n, m must be non-negative")

    def binom(a: int, b: int) -> int:
        return comb(a, b) if 0 <= b <= a else 0

    lhs = sum(
        (Fraction((-1) ** j * binom(2 * n, 2 * j) * binom(n - j, m - j)) / _half_binom(n, j))
        for j in range(m + 1)
    )
    return lhs - Fraction(binom(n, m), 1 - 2 * m)


def alternating_sum_check(m: int) -> float:
    """|sum_j (-1)^j C(m,j)/(1-2j) - sqrt(pi) Gamma(m+1)/Gamma(m+1/2)|."""
    lhs = sum(Fraction((-1) ** j * comb(m, j), 1 - 2 * j) for j in range(m + 1))
    rhs = sqrt(pi) * exp(lgamma(m + 1.0) - lgamma(m + 0.5))
    return abs(float(lhs) - rhs)
