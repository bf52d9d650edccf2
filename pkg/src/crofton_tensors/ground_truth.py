"""Reference values for surface tensors and brute-force Crofton integrals.

Two independent routes are kept apart on purpose:

* direct: facet atoms for polytopes, a parametrization of the boundary for
  balls and ellipsoids;
* integral-geometric: quadrature over line directions and offsets using only
  the hit predicate of the body.

The invariant line measure is the rotation invariant probability on
directions times Lebesgue measure on the orthogonal complement, so that the
lines hitting the unit ball have measure kappa_{n-1}.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import factorial

import numpy as np

from .bodies import Ball, ConvexBody, Ellipsoid, Polytope, perp2
from .coeffs import G_batch, omega
from .symtensor import SymmetricTensor, LinearDirection, monomials, n_components

BISECT_STEPS = 52
PAD = 0.01


@dataclass(frozen=True)
class QuadratureSpec:
    direction_nodes: int = 2048
    offset_nodes: int = 512
    method: str = "midpoint-grid"

    def __post_init__(self):
        if self.direction_nodes < 16 or self.offset_nodes < 16:
            raise ValueError("quadrature node counts must be >= 16")
        if self.method not in ("midpoint-grid", "boundary-parametrization"):
            raise ValueError(f"unknown quadrature method {self.method!r}")


# sphere rules ---------------------------------------------------------------

def _orthonormal_completion(a: np.ndarray) -> np.ndarray:
    """Rows: an orthonormal basis whose first vector is ``a``."""
    n = a.size
    M = np.eye(n)
    M[:, 0] = a
    q, _ = np.linalg.qr(M)
    q[:, 0] *= np.sign(q[:, 0] @ a)
    return q.T


def sphere_rule(n: int, m: int, pole=None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals over S^{n-1} w.r.t. Hausdorff measure.

    The rule is split at the great sphere orthogonal to ``pole`` so that
    integrands with a kink there (|<pole, y>|) are integrated piecewise smoothly:
    Gauss-Legendre on each half-circle for n = 2; Gauss-Legendre in the polar
    coordinate on each hemisphere times the trapezoid rule in azimuth for n = 3.
    """
    pole = np.eye(n)[0] if pole is None else np.asarray(pole, dtype=float) / np.linalg.norm(pole)
    frame = _orthonormal_completion(pole)
    x, w = np.polynomial.legendre.leggauss(m)
    if n == 2:
        # angle measured from the pole; halves (-pi/2, pi/2) and (pi/2, 3pi/2)
        t = np.concatenate([x * np.pi / 2, np.pi + x * np.pi / 2])
        wt = np.concatenate([w, w]) * np.pi / 2
        Y = np.outer(np.cos(t), frame[0]) + np.outer(np.sin(t), frame[1])
        return Y, wt
    if n == 3:
        z = np.concatenate([(x + 1) / 2, -(x + 1) / 2])
        wz = np.concatenate([w, w]) / 2
        n_az = 2 * m
        phi = (np.arange(n_az) + 0.5) * 2 * np.pi / n_az
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        rr = np.sqrt(np.clip(1 - zz**2, 0, None))
        Y = (
            zz.reshape(-1, 1) * frame[0]
            + (rr * np.cos(pp)).reshape(-1, 1) * frame[1]
            + (rr * np.sin(pp)).reshape(-1, 1) * frame[2]
        )
        W = np.outer(wz, np.full(n_az, 2 * np.pi / n_az)).reshape(-1)
        return Y, W
    raise NotImplementedError("sphere rules for n = 2, 3")


# direct route -------------------------------------------------------------------

def _moment(normals: np.ndarray, weights: np.ndarray, s: int) -> np.ndarray:
    return weights @ monomials(normals, s)


def surface_tensor_polytope(P: Polytope, s: int) -> SymmetricTensor:
    """Phi_{n-1,0,s}(P) = (1 / (s! omega_{s+1})) sum_F area(F) u_F^s."""
    coeffs = _moment(P.normals, P.areas, s) / (factorial(s) * omega(s + 1))
    return SymmetricTensor(P.dim, s, coeffs)


def surface_tensor_smooth(K, s: int, q: QuadratureSpec | None = None) -> SymmetricTensor:
    """Phi_{n-1,0,s} of a ball/ellipsoid by integrating nu^s over the boundary.

    The boundary is parametrized as x = c + T y, y on the unit sphere; the
    outer normal is T^{-T} y / |T^{-T} y| and dH(x) = |det T| |T^{-T} y| dH(y).
    """
    q = q or QuadratureSpec(256, 16, "boundary-parametrization")
    if isinstance(K, Ball):
        K = Ellipsoid(K.center, np.full(K.dim, K.radius))
    if not isinstance(K, Ellipsoid):
        raise TypeError("smooth route covers balls and ellipsoids")
    n = K.dim
    Y, W = sphere_rule(n, max(q.direction_nodes // 2, 8))
    N = Y @ K.inverse_map  # rows are (T^{-T} y)^T
    norm = np.linalg.norm(N, axis=1)
    jac = float(np.prod(K.semi_axes)) * norm
    coeffs = _moment(N / norm[:, None], W * jac, s) / (factorial(s) * omega(s + 1))
    return SymmetricTensor(n, s, coeffs)


def surface_tensor(K: ConvexBody, s: int, q: QuadratureSpec | None = None) -> SymmetricTensor:
    if isinstance(K, Polytope):
        return surface_tensor_polytope(K, s)
    return surface_tensor_smooth(K, s, q)


def brightness_oracle(K: ConvexBody, v, q: QuadratureSpec | None = None) -> float:
    """(1/2) int |<v, w>| S_{n-1}(K, dw) from atoms or a kink-aligned boundary rule."""
    v = v.unit if isinstance(v, LinearDirection) else np.asarray(v, dtype=float)
    if isinstance(K, Polytope):
        return 0.5 * float(np.abs(K.normals @ v) @ K.areas)
    q = q or QuadratureSpec(256, 16, "boundary-parametrization")
    if isinstance(K, Ball):
        K = Ellipsoid(K.center, np.full(K.dim, K.radius))
    # |<v, T^{-T} y>| = |<T^{-1} v, y>|: split the y-sphere where this vanishes
    pole = K.inverse_map @ v
    Y, W = sphere_rule(K.dim, max(q.direction_nodes // 2, 8), pole=pole)
    vals = float(np.prod(K.semi_axes)) * np.abs(Y @ pole)
    return 0.5 * float(W @ vals)


# integral-geometric route -------------------------------------------------------

def direction_rule(n: int, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions and probability weights for the invariant measure on lines through 0.

    n = 2 uses the midpoint rule in the angle; n = 3 uses about ``D`` points.
    """
    if n == 2:
        phi = (np.arange(D) + 0.5) * np.pi / D
        return np.column_stack([np.cos(phi), np.sin(phi)]), np.full(D, 1.0 / D)
    if n == 3:
        # Gauss-Legendre in cos(theta) on the upper hemisphere, midpoints in azimuth
        n_pol = max(4, int(round(np.sqrt(D / 2))))
        n_az = 2 * n_pol
        x, wx = np.polynomial.legendre.leggauss(n_pol)
        z = (x + 1) / 2
        ph = (np.arange(n_az) + 0.5) * 2 * np.pi / n_az
        zz, pp = np.meshgrid(z, ph, indexing="ij")
        rr = np.sqrt(1 - zz**2)
        U = np.column_stack([(rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel(), zz.ravel()])
        w = np.outer(wx / 2, np.full(n_az, 1.0 / n_az)).ravel()
        return U, w
    raise NotImplementedError("direction rules for n = 2, 3")


def _complement_basis(U: np.ndarray) -> np.ndarray:
    """For each unit row u, an orthonormal basis of u-perp; shape (N, n-1, n)."""
    if U.shape[1] == 2:
        return perp2(U)[:, None, :]
    helper = np.where(np.abs(U[:, [0]]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    w1 = np.cross(U, helper)
    w1 /= np.linalg.norm(w1, axis=1, keepdims=True)
    w2 = np.cross(U, w1)
    return np.stack([w1, w2], axis=1)


def hit_length(K: ConvexBody, base: np.ndarray, step: np.ndarray, dirs: np.ndarray,
               lo: np.ndarray, hi: np.ndarray, nodes: int) -> np.ndarray:
    """Lebesgue measure of {x in [lo, hi]: line base + x step + R dirs hits K}, per row.

    A midpoint grid locates the hit interval (convexity makes it one interval);
    its ends are then refined by bisection on the hit predicate.
    """
    B = base.shape[0]
    h = (hi - lo) / nodes
    X = lo[:, None] + (np.arange(nodes) + 0.5)[None, :] * h[:, None]
    pts = base[:, None, :] + X[:, :, None] * step[:, None, :]
    D = np.broadcast_to(dirs[:, None, :], pts.shape)
    hit = K.hits(pts.reshape(-1, pts.shape[-1]), D.reshape(-1, D.shape[-1])).reshape(B, nodes)
    any_hit = hit.any(axis=1)
    first = np.argmax(hit, axis=1)
    last = nodes - 1 - np.argmax(hit[:, ::-1], axis=1)
    rows = np.arange(B)

    def bisect(inside, outside):
        for _ in range(BISECT_STEPS):
            mid = 0.5 * (inside + outside)
            ok = K.hits(base + mid[:, None] * step, dirs)
            inside = np.where(ok, mid, inside)
            outside = np.where(ok, outside, mid)
        return 0.5 * (inside + outside)

    x_in_lo = X[rows, first]
    x_out_lo = np.where(first > 0, X[rows, np.maximum(first - 1, 0)], lo)
    x_in_hi = X[rows, last]
    x_out_hi = np.where(last < nodes - 1, X[rows, np.minimum(last + 1, nodes - 1)], hi)
    a = bisect(x_in_lo, x_out_lo)
    b = bisect(x_in_hi, x_out_hi)
    return np.where(any_hit, b - a, 0.0)


def _offset_integrals(K: ConvexBody, U: np.ndarray, O: int) -> np.ndarray:
    """int_{u-perp} V_0(K cap (u + x)) dx for each direction row of U."""
    n = K.dim
    W = _complement_basis(U)
    if n == 2:
        w = W[:, 0, :]
        hi = K.support(w)
        lo = -K.support(-w)
        pad = PAD * (hi - lo)
        return hit_length(K, np.zeros_like(U), w, U, lo - pad, hi + pad, O)
    w1, w2 = W[:, 0, :], W[:, 1, :]
    hi1, lo1 = K.support(w1), -K.support(-w1)
    hi2, lo2 = K.support(w2), -K.support(-w2)
    pad1 = PAD * (hi1 - lo1)
    lo1, hi1 = lo1 - pad1, hi1 + pad1
    # rows along w2 between the exact shadow extents; the row length has square-root
    # behaviour at both ends, so Gauss-Legendre nodes are clustered by t -> (3t - t^3)/2
    x, wx = np.polynomial.legendre.leggauss(O)
    t, wt = (3 * x - x**3) / 2, wx * 1.5 * (1 - x**2)
    half, mid = (hi2 - lo2) / 2, (hi2 + lo2) / 2
    Y = mid[:, None] + half[:, None] * t[None, :]
    N = U.shape[0]
    base = (Y[:, :, None] * w2[:, None, :]).reshape(N * O, n)
    rep = lambda a: np.repeat(a, O, axis=0)
    lengths = hit_length(K, base, rep(w1), rep(U), rep(lo1), rep(hi1), O).reshape(N, O)
    return (lengths @ wt) * half


def line_quadrature(K: ConvexBody, q: QuadratureSpec, workers: int = 1, chunk: int = 256):
    """Directions, probability weights, and hit-offset integrals for the Crofton oracles."""
    U, w = direction_rule(K.dim, q.direction_nodes)
    starts = list(range(0, U.shape[0], chunk))
    job = lambda a: _offset_integrals(K, U[a:a + chunk], q.offset_nodes)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, starts))
    else:
        parts = [job(a) for a in starts]
    return U, w, np.concatenate(parts)


def relative_tensor_weights(U: np.ndarray, s: int) -> np.ndarray:
    """Phi^{(E)}_{0,0,s} per unit Euler characteristic, summing u^s over both unit vectors of the line."""
    return (monomials(U, s) + monomials(-U, s)) / (factorial(s) * omega(s + 1))


def crofton_integral_oracle(K: ConvexBody, s: int, q: QuadratureSpec | None = None,
                            workers: int = 1) -> SymmetricTensor:
    """Brute-force int Phi^{(E)}_{0,0,s}(K cap E) mu(dE) over all lines."""
    q = q or QuadratureSpec()
    U, w, I = line_quadrature(K, q, workers)
    coeffs = (w * I) @ relative_tensor_weights(U, s)
    return SymmetricTensor(K.dim, s, coeffs)


def inverse_crofton_oracle(K: ConvexBody, s: int, q: QuadratureSpec | None = None,
                           workers: int = 1) -> SymmetricTensor:
    """Brute-force int G_s(pi(E)) V_0(K cap E) mu(dE); should equal Phi_{n-1,0,s}(K)."""
    q = q or QuadratureSpec()
    U, w, I = line_quadrature(K, q, workers)
    coeffs = (w * I) @ G_batch(U, s)
    return SymmetricTensor(K.dim, s, coeffs)


def rel_gap(a: SymmetricTensor, b: SymmetricTensor) -> float:
    """Max component difference relative to the largest component of ``b``."""
    scale = float(np.max(np.abs(b.coeffs)))
    return a.max_abs_diff(b) / scale if scale > 0 else a.max_abs_diff(b)
