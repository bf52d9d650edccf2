"""Design-based estimators of surface tensors from random lines and flats.

Every design has a batch form ``*_batch(..., rng, size) -> (size, ncomp)``
that plugs into :func:`crofton_tensors.mc.mc_run`, and a single-sample form
mirroring the textbook estimator on explicit geometric objects.

Conventions: a line direction ``u`` stands for the line [u]; the projection
volume V_{n-1}(K | [u]^perp) is ``K.brightness(u)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from typing import Callable

import numpy as np
from scipy.stats import special_ortho_group

from .bodies import (
    AffineLine,
    Ball,
    ConvexBody,
    Ellipsoid,
    Empty,
    VerticalFlat2,
    flat_section,
    perp2,
)
from .coeffs import G_batch, kappa, omega
from .ground_truth import _complement_basis, direction_rule, surface_tensor
from .symtensor import (
    LinearDirection,
    SymmetricTensor,
    multi_indices,
    rank2_spectrum,
    POSDEF_TOL,
)


# reference sets ---------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceSet:
    """Compact convex reference set A with its cached (n-1)-th intrinsic volume."""

    body: ConvexBody
    surface: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "surface", float(surface_tensor(self.body, 0).coeffs[0]))

    @classmethod
    def ball(cls, center, radius: float) -> ReferenceSet:
        return cls(Ball(np.asarray(center, dtype=float), float(radius)))

    @property
    def dim(self) -> int:
        return self.body.dim

    @property
    def is_ball(self) -> bool:
        return isinstance(self.body, Ball)

    @property
    def c1_inv(self) -> float:
        """Inverse normalizer of the IUR line law: mu(lines hitting A)."""
        return 2.0 * kappa(self.dim - 1) * self.surface / omega(self.dim)

    def contains(self, K: ConvexBody, nodes: int = 256) -> bool:
        U, _ = direction_rule(self.dim, nodes)
        U = np.vstack([U, -U])
        return bool(np.all(K.support(U) <= self.body.support(U) + 1e-12))

    def check(self, K: ConvexBody):
        if not self.contains(K):
            raise ValueError("the body is not contained in the reference set")


# direction and line sampling ----------------------------------------------------

def isotropic_directions(n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    if n == 2:
        phi = rng.uniform(0.0, pi, size)
        return np.column_stack([np.cos(phi), np.sin(phi)])
    U = rng.standard_normal((size, n))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def _uniform_in_ball(rng, size: int, dim: int) -> np.ndarray:
    if dim == 1:
        return rng.uniform(-1.0, 1.0, (size, 1))
    r = np.sqrt(rng.uniform(0.0, 1.0, size))
    t = rng.uniform(0.0, 2 * pi, size)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def sample_iur_lines(A: ReferenceSet, rng: np.random.Generator, size: int):
    """IUR lines hitting A as (points, unit directions), each (size, n)."""
    n = A.dim
    if A.is_ball:
        U = isotropic_directions(n, rng, size)
        W = _complement_basis(U)
        x = _uniform_in_ball(rng, size, n - 1) * A.body.radius
        return A.body.center + np.einsum("ik,ikj->ij", x, W), U
    # IUR lines hitting a ball around the bounding box, rejecting those that miss A.
    # Uniform directions with per-direction offset boxes would be biased: the
    # direction law has to be weighted by the projection of A.
    I = np.eye(n)
    hi, lo = A.body.support(I), -A.body.support(-I)
    outer = ReferenceSet.ball((hi + lo) / 2, 0.5 * float(np.linalg.norm(hi - lo)) * (1 + 1e-9))
    P = np.empty((size, n))
    Uo = np.empty((size, n))
    filled = 0
    while filled < size:
        m = max(64, int(1.3 * (size - filled)))
        pts, dirs = sample_iur_lines(outer, rng, m)
        ok = A.body.hits(pts, dirs)
        k = min(int(ok.sum()), size - filled)
        P[filled:filled + k] = pts[ok][:k]
        Uo[filled:filled + k] = dirs[ok][:k]
        filled += k
    return P, Uo


def sample_iur_line(A: ReferenceSet, rng: np.random.Generator) -> AffineLine:
    P, U = sample_iur_lines(A, rng, 1)
    return AffineLine.through(P[0], U[0])


def orthogonal_frames(n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform random orthonormal frames; shape (size, n, n), rows are the directions."""
    if n == 2:
        phi = rng.uniform(0.0, pi, size)
        u = np.column_stack([np.cos(phi), np.sin(phi)])
        return np.stack([u, perp2(u)], axis=1)
    R = special_ortho_group.rvs(n, size=size, random_state=rng)
    return np.asarray(R).reshape(size, n, n).transpose(0, 2, 1)


def orthogonal_frame(n: int, rng: np.random.Generator) -> list[LinearDirection]:
    return [LinearDirection(v) for v in orthogonal_frames(n, rng, 1)[0]]


def _units(dirs) -> np.ndarray:
    return np.array([d.unit if isinstance(d, LinearDirection) else np.asarray(d, float) for d in dirs])


# IUR hit-or-miss and projection estimators -------------------------------------

def hitmiss_batch(K: ConvexBody, A: ReferenceSet, P: np.ndarray, U: np.ndarray, s: int) -> np.ndarray:
    return A.c1_inv * G_batch(U, s) * K.hits(P, U)[:, None]


def est_hitmiss(K: ConvexBody, A: ReferenceSet, E: AffineLine, s: int) -> SymmetricTensor:
    row = hitmiss_batch(K, A, E.offset[None, :], E.direction.unit[None, :], s)[0]
    return SymmetricTensor(K.dim, s, row)


def projection_batch(K: ConvexBody, U: np.ndarray, s: int) -> np.ndarray:
    return G_batch(U, s) * np.asarray(K.brightness(U))[:, None]


def est_projection(K: ConvexBody, dirs, s: int) -> SymmetricTensor:
    U = _units(dirs)
    if len(U) == 0:
        raise ValueError("need at least one direction")
    return SymmetricTensor(K.dim, s, projection_batch(K, U, s).mean(axis=0))


def iur_design(K, A: ReferenceSet, s: int, lines: int = 1, frame: str = "iid"):
    """Hit-or-miss estimator from ``lines`` IUR lines, i.i.d. or with orthogonal directions."""
    A.check(K)

    def run(rng, size):
        if frame == "orthogonal":
            F = orthogonal_frames(K.dim, rng, size)[:, :lines, :]
            acc = 0.0
            for k in range(lines):
                x = _uniform_in_ball(rng, size, K.dim - 1) * A.body.radius if A.is_ball else None
                if x is None:
                    raise NotImplementedError("orthogonal hit-or-miss frames need a ball reference set")
                W = _complement_basis(F[:, k, :])
                P = A.body.center + np.einsum("ik,ikj->ij", x, W)
                acc = acc + hitmiss_batch(K, A, P, F[:, k, :], s)
            return acc / lines
        acc = 0.0
        for _ in range(lines):
            P, U = sample_iur_lines(A, rng, size)
            acc = acc + hitmiss_batch(K, A, P, U, s)
        return acc / lines

    return run


def projection_design(K, s: int, lines: int = 1, frame: str = "iid"):
    def run(rng, size):
        if frame == "orthogonal":
            F = orthogonal_frames(K.dim, rng, size)[:, :lines, :]
            return sum(projection_batch(K, F[:, k, :], s) for k in range(lines)) / lines
        return sum(projection_batch(K, isotropic_directions(K.dim, rng, size), s)
                   for _ in range(lines)) / lines

    return run


def posdef_condition(K: ConvexBody, frame) -> bool:
    """(n+1) V_{n-1}(K | L_i^perp) > sum_j V_{n-1}(K | L_j^perp) for every frame line."""
    b = np.asarray(K.brightness(_units(frame)))
    return bool(np.all((K.dim + 1) * b > b.sum()))


def sufficient_ratio_check(K: ConvexBody, n: int | None = None) -> bool:
    n = K.dim if n is None else n
    r, R = K.inradius_circumradius()
    if r <= 0:
        raise ValueError("degenerate body")
    return r / R > (1.0 - 1.0 / n) ** (1.0 / (n - 1))


def ellipse_posdef_probability(k: float) -> float:
    """Probability that the orthogonal-pair projection estimator is positive definite on an ellipse."""
    if k > 0.5:
        return 1.0
    a = np.sqrt((1 - 4 * k * k) / (5 * (1 - k * k)))
    return float(2 / pi * (np.arccos(a) - np.arcsin(a)))


# systematic design in the plane ------------------------------------------------

def systematic_directions(N: int, phi0) -> np.ndarray:
    """Angles phi0 + i pi / N, i < N; ``phi0`` may be an array (leading axis kept)."""
    phi0 = np.asarray(phi0, dtype=float)
    return phi0[..., None] + np.arange(N) * pi / N


def systematic_estimator_2d(K: ConvexBody, N: int, phi0: float) -> SymmetricTensor:
    if K.dim != 2:
        raise ValueError("systematic design is planar")
    if N < 1:
        raise ValueError("N must be positive")
    phi = systematic_directions(N, phi0)
    U = np.column_stack([np.cos(phi), np.sin(phi)])
    return SymmetricTensor(2, 2, projection_batch(K, U, 2).mean(axis=0))


def systematic_design(K: ConvexBody, N: int, s: int = 2):
    """S_N(K, phi0) with phi0 uniform on [0, pi/N] (any even rank)."""
    if K.dim != 2:
        raise ValueError("systematic design is planar")

    def run(rng, size):
        phi = systematic_directions(N, rng.uniform(0.0, pi / N, size)).reshape(-1)
        U = np.column_stack([np.cos(phi), np.sin(phi)])
        return projection_batch(K, U, s).reshape(size, N, -1).mean(axis=1)

    return run


def systematic_posdef_curve(K: ConvexBody, N_values, grid: int = 500) -> np.ndarray:
    """For each N, share of the phi0 midpoint grid on [0, pi/N] giving a positive definite S_N."""
    out = []
    for N in N_values:
        phi0 = (np.arange(grid) + 0.5) * (pi / N) / grid
        phi = systematic_directions(N, phi0).reshape(-1)
        U = np.column_stack([np.cos(phi), np.sin(phi)])
        T = projection_batch(K, U, 2).reshape(grid, N, 3).mean(axis=1)
        M = np.stack([np.stack([T[:, 0], T[:, 1]], -1), np.stack([T[:, 1], T[:, 2]], -1)], axis=1)
        out.append(float(np.mean(np.linalg.eigvalsh(M)[:, 0] > POSDEF_TOL)))
    return np.array(out)


# vertical sections (n = 3) -----------------------------------------------------

def _check_vertical(A: ReferenceSet):
    if A.dim != 3:
        raise ValueError("vertical sections need n = 3")


def axis_complement(L0: LinearDirection) -> np.ndarray:
    """Orthonormal basis (2 x 3) of L0-perp."""
    return _complement_basis(L0.unit[None, :])[0]


def projected_intrinsic_volume(A: ReferenceSet, L0: LinearDirection, nodes: int = 4096) -> float:
    """V_{n-2}(A | L0-perp) for n = 3: half the perimeter of the projected body."""
    if A.is_ball:
        return pi * A.body.radius
    a = axis_complement(L0)
    t = (np.arange(nodes) + 0.5) * 2 * pi / nodes
    W = np.outer(np.cos(t), a[0]) + np.outer(np.sin(t), a[1])
    return 0.5 * float(np.mean(A.body.support(W))) * 2 * pi


def sample_vur_flats(A: ReferenceSet, L0: LinearDirection, rng, size: int):
    """Second spanning directions b, flat normals m and offsets (multiples of m); each (size, 3)."""
    _check_vertical(A)
    a = axis_complement(L0)
    th = rng.uniform(0.0, pi, size)
    b = np.outer(np.cos(th), a[0]) + np.outer(np.sin(th), a[1])
    m = np.cross(L0.unit[None, :], b)
    hi = A.body.support(m)
    lo = -A.body.support(-m)
    t = lo + rng.uniform(size=size) * (hi - lo)
    return b, m, t[:, None] * m


def sample_vur_flat(A: ReferenceSet, L0: LinearDirection, rng) -> VerticalFlat2:
    b, _, off = sample_vur_flats(A, L0, rng, 1)
    return VerticalFlat2(L0, LinearDirection(b[0]), off[0])


def _ball_section(A: ReferenceSet, L0: LinearDirection, b: np.ndarray, off: np.ndarray):
    """Centre (world) and radius of the disk A cap H for a ball A."""
    c = A.body.center
    rel = c - off
    inplane = np.outer(rel @ L0.unit, L0.unit) + np.einsum("ij,ij->i", rel, b)[:, None] * b
    centre = off + inplane
    rho2 = A.body.radius**2 - np.sum((rel - inplane) ** 2, axis=1)
    return centre, np.sqrt(np.maximum(rho2, 0.0))


def vertical_batch(K: ConvexBody, A: ReferenceSet, L0: LinearDirection, s: int):
    """Two-step VUR estimator: a VUR flat, then an IUR line inside the flat hitting A."""
    _check_vertical(A)
    if not A.is_ball:
        raise NotImplementedError("in-flat line sampling is implemented for ball reference sets")
    A.check(K)
    VA = projected_intrinsic_volume(A, L0)
    e = L0.unit

    def run(rng, size):
        b, _, off = sample_vur_flats(A, L0, rng, size)
        centre, rho = _ball_section(A, L0, b, off)
        psi = rng.uniform(0.0, pi, size)
        d = np.outer(np.cos(psi), e) + np.sin(psi)[:, None] * b
        w = np.outer(-np.sin(psi), e) + np.cos(psi)[:, None] * b
        x = rng.uniform(-1.0, 1.0, size) * rho
        P = centre + x[:, None] * w
        hit = K.hits(P, d)
        weight = VA * (2.0 / pi) * (pi * rho) * np.abs(np.sin(psi)) * hit
        return G_batch(d, s) * weight[:, None]

    return run


def est_vertical(K: ConvexBody, A: ReferenceSet, L0: LinearDirection, H: VerticalFlat2,
                 E: AffineLine, s: int) -> SymmetricTensor:
    """V_{n-2}(A|L0-perp) c_3(A)^{-1} G_s(pi(E)) V_0(K cap E) sin(angle(E, L0))^{n-2}."""
    _check_vertical(A)
    sec = flat_section(A.body, H)
    VAH = 0.0 if sec.is_empty else sec.surface_content()
    u = E.direction.unit
    sin = np.sqrt(max(0.0, 1.0 - float(u @ L0.unit) ** 2))
    hit = float(K.hits(E.offset[None, :], u[None, :])[0])
    w = projected_intrinsic_volume(A, L0) * (2.0 / pi) * VAH * sin * hit
    return SymmetricTensor(3, s, G_batch(u[None, :], s)[0] * w)


def _section_widths(K: ConvexBody, e: np.ndarray, b: np.ndarray, off: np.ndarray,
                    U2: np.ndarray) -> np.ndarray:
    """Widths of K cap H along in-flat directions; H = off + span(e, b), U2 in (e, b) coordinates."""
    if isinstance(K, Ball):
        K = Ellipsoid(K.center, np.full(3, K.radius))
    if isinstance(K, Ellipsoid):
        Ti = K.inverse_map
        B = np.stack([np.broadcast_to(Ti @ e, b.shape), b @ Ti.T], axis=2)  # (N, 3, 2)
        g = (off - K.center) @ Ti.T
        M = np.einsum("nki,nkj->nij", B, B)
        Minv = np.linalg.inv(M)
        Bg = np.einsum("nki,nk->ni", B, g)
        z0 = -np.einsum("nij,nj->ni", Minv, Bg)
        r2 = 1.0 - np.einsum("ni,ni->n", g, g) + np.einsum("ni,nij,nj->n", z0, M, z0)
        q = np.einsum("ni,nij,nj->n", U2, Minv, U2)
        return np.where(r2 > 0, 2.0 * np.sqrt(np.maximum(r2, 0.0) * q), 0.0)
    out = np.empty(len(b))
    for k in range(len(b)):
        H = VerticalFlat2(LinearDirection(e), LinearDirection(b[k]), off[k])
        sec = flat_section(K, H)
        out[k] = 0.0 if sec.is_empty else float(sec.width(U2[k]))
    return out


def vertical_width_batch(K: ConvexBody, A: ReferenceSet, L0: LinearDirection, s: int):
    """VUR flat plus a uniform in-flat direction U; uses the width of K cap H along U."""
    _check_vertical(A)
    A.check(K)
    VA = projected_intrinsic_volume(A, L0)
    e = L0.unit

    def run(rng, size):
        b, _, off = sample_vur_flats(A, L0, rng, size)
        alpha = rng.uniform(0.0, pi, size)
        U2 = np.column_stack([np.cos(alpha), np.sin(alpha)])
        d = np.outer(-np.sin(alpha), e) + np.cos(alpha)[:, None] * b  # U-perp inside the flat
        w = _section_widths(K, e, b, off, U2)
        return G_batch(d, s) * (VA * np.abs(np.cos(alpha)) * w)[:, None]

    return run


def est_vertical_width(K: ConvexBody, A: ReferenceSet, L0: LinearDirection, H: VerticalFlat2,
                       U, s: int) -> SymmetricTensor:
    """V_{n-2}(A|L0-perp) G_s(U-perp in H) |cos angle(U, L0)|^{n-2} w(K cap H, U)."""
    _check_vertical(A)
    U = np.asarray(U, dtype=float)
    U = U / np.linalg.norm(U)
    z = U @ H.basis  # flat coordinates (vertical, second)
    if abs(np.linalg.norm(z) - 1.0) > 1e-9:
        raise ValueError("U must lie in the direction space of H")
    d = -z[1] * H.vertical_axis.unit + z[0] * H.second_direction.unit
    sec = flat_section(K, H)
    w = 0.0 if sec.is_empty else float(sec.width(z))
    val = projected_intrinsic_volume(A, L0) * abs(z[0]) * w
    return SymmetricTensor(3, s, G_batch(d[None, :], s)[0] * val)


# f-weighted lines (n = 2, s = 2) -----------------------------------------------

COMPONENTS_2D = {(1, 1): 0, (1, 2): 1, (2, 1): 1, (2, 2): 2}


def g_component(ij, phi) -> np.ndarray:
    """g_ij([u_phi]) = G_2([u_phi])(e_i, e_j) in the plane."""
    phi = np.asarray(phi, dtype=float)
    U = np.stack([np.cos(phi).ravel(), np.sin(phi).ravel()], axis=1)
    return G_batch(U, 2)[:, COMPONENTS_2D[tuple(ij)]].reshape(phi.shape)


def fstar_density(ij, phi) -> np.ndarray:
    """f*(L) proportional to |g_ij(L)|, normalized against the uniform probability on [0, pi)."""
    from .curves import M_CONST

    phi = np.asarray(phi, dtype=float)
    ij = tuple(ij)
    if ij == (1, 1):
        return 0.375 * np.abs(np.cos(phi) ** 2 - 1.0 / 3.0) / M_CONST
    if ij == (2, 2):
        return 0.375 * np.abs(np.sin(phi) ** 2 - 1.0 / 3.0) / M_CONST
    if ij in ((1, 2), (2, 1)):
        return pi * np.abs(np.cos(phi) * np.sin(phi))
    raise ValueError(f"unknown component {ij}")


class DirectionDensity:
    """Density on planar line directions phi in [0, pi), tabulated for exact inverse-CDF sampling.

    The sampled law is the cell-average of ``f`` on ``nodes`` equal cells and
    :meth:`pdf` returns that same piecewise-constant density, so weighting by
    it keeps the estimator exactly unbiased.
    """

    def __init__(self, f: Callable[[np.ndarray], np.ndarray], nodes: int = 4096, name: str = "f"):
        self.name = name
        self.nodes = nodes
        self.h = pi / nodes
        x, w = np.polynomial.legendre.leggauss(8)
        left = np.arange(nodes) * self.h
        pts = left[:, None] + (x[None, :] + 1) * self.h / 2
        mass = (np.asarray(f(pts), dtype=float) @ w) * self.h / 2
        if np.any(mass <= 0):
            raise ValueError("density vanishes on a set of positive measure")
        self.mass = mass / mass.sum()
        self.cdf = np.concatenate([[0.0], np.cumsum(self.mass)])
        self.cdf[-1] = 1.0

    def pdf(self, phi) -> np.ndarray:
        """Density w.r.t. the uniform probability on [0, pi)."""
        k = np.clip((np.asarray(phi) / self.h).astype(int), 0, self.nodes - 1)
        return self.mass[k] * self.nodes

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        v = rng.uniform(size=size)
        k = np.clip(np.searchsorted(self.cdf, v, side="right") - 1, 0, self.nodes - 1)
        frac = (v - self.cdf[k]) / self.mass[k]
        return (k + np.clip(frac, 0.0, 1.0)) * self.h

    def sample_rejection(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Same law as :meth:`sample` by rejection from the uniform; a cross-check path."""
        top = float(self.mass.max()) * self.nodes
        out = np.empty(0)
        while out.size < size:
            phi = rng.uniform(0.0, pi, 2 * size)
            keep = rng.uniform(0.0, top, 2 * size) < self.pdf(phi)
            out = np.concatenate([out, phi[keep]])
        return out[:size]

    @classmethod
    def uniform(cls) -> DirectionDensity:
        return cls(lambda p: np.ones_like(p), nodes=16, name="uniform")

    @classmethod
    def fstar(cls, ij, nodes: int = 4096) -> DirectionDensity:
        return cls(lambda p: fstar_density(ij, p), nodes, name=f"fstar{ij[0]}{ij[1]}")

    @classmethod
    def fstar_K(cls, K: ConvexBody, R: float, ij, nodes: int = 4096) -> DirectionDensity:
        """Variance-optimal density for K: sqrt(2 R V_1(K | L^perp)) |g_ij(L)|."""
        def f(p):
            U = np.stack([np.cos(p), np.sin(p)], axis=-1)
            return np.sqrt(2 * R * np.asarray(K.brightness(U))) * np.abs(g_component(ij, p))
        return cls(f, nodes, name=f"fstarK{ij[0]}{ij[1]}")


def weighted_batch(K: ConvexBody, A: ReferenceSet, ij, density: DirectionDensity):
    """phi_hat_ij / f for an f-weighted line hitting the ball A."""
    if K.dim != 2 or not A.is_ball:
        raise ValueError("f-weighted lines are defined for n = 2 and a ball reference set")
    A.check(K)
    R, c = A.body.radius, A.body.center

    def run(rng, size):
        phi = density.sample(rng, size)
        U = np.column_stack([np.cos(phi), np.sin(phi)])
        x = rng.uniform(-R, R, size)
        P = c + x[:, None] * perp2(U)
        hit = K.hits(P, U)
        return 2 * R * g_component(ij, phi) * hit / density.pdf(phi)

    return run


def est_weighted(K: ConvexBody, A: ReferenceSet, ij, f: Callable, E: AffineLine) -> float:
    """2R g_ij(pi(E)) V_0(K cap E) / f(pi(E)) for a given f-weighted line."""
    if not A.is_ball or K.dim != 2:
        raise ValueError("f-weighted lines are defined for n = 2 and a ball reference set")
    u = E.direction.unit
    phi = float(np.arctan2(u[1], u[0]) % pi)
    fv = float(f(phi))
    if fv <= 0:
        raise ValueError("density vanishes at the sampled direction")
    hit = float(K.hits(E.offset[None, :], u[None, :])[0])
    return 2 * A.body.radius * float(g_component(ij, phi)) * hit / fv


def component_index(n: int, ij) -> int:
    key = tuple(sorted(int(i) - 1 for i in ij))
    return multi_indices(n, 2).index(key)


def spectrum(t: SymmetricTensor) -> np.ndarray:
    return rank2_spectrum(t)
