"""Stationary Poisson processes of convex grains and their specific surface tensors.

Grains are ellipsoids (disks and balls included) with centre at the origin
before translation, so a realization is stored as arrays: germ positions and
the inverse linear maps of the grains.  Simulation happens in the observation
window dilated by the grain circumradius bound, so every grain whose chord
midpoint can fall inside the window is present (minus-sampling).

Line intensity estimation counts the grains whose chord midpoint lies on a
test segment.  Each grain contributes exactly one such point per line it
meets, so by Campbell's theorem the count divided by the segment length is
unbiased for gamma_L = gamma E[V_{n-1}(K | L^perp)].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.spatial.transform import Rotation

from .bodies import Ball, Ellipsoid
from .coeffs import G_batch
from .estimators import isotropic_directions
from .ground_truth import sphere_rule, surface_tensor_smooth, QuadratureSpec
from .symtensor import SymmetricTensor, metric_tensor, monomials, tensor_power


# grain laws -------------------------------------------------------------------

@dataclass(frozen=True)
class GrainLaw:
    """Distribution of centred ellipsoidal grains.

    kind: ``disk`` (fixed radius), ``random_disk`` (radius uniform on
    [radius_min, radius]), ``ellipse`` / ``spheroid`` (fixed semi-axes, uniform
    random rotation).
    """

    kind: str
    dim: int = 2
    radius: float = 0.5
    radius_min: float = 0.0
    semi_axes: tuple = ()

    def __post_init__(self):
        if self.kind not in ("disk", "random_disk", "ellipse", "spheroid"):
            raise ValueError(f"unknown grain kind {self.kind!r}")
        if self.kind in ("ellipse", "spheroid"):
            if len(self.semi_axes) != self.dim or min(self.semi_axes) <= 0:
                raise ValueError("semi_axes must give one positive value per dimension")
        elif self.radius <= 0 or not 0 <= self.radius_min <= self.radius:
            raise ValueError("radii must satisfy 0 <= radius_min <= radius, radius > 0")
        if self.kind == "ellipse" and self.dim != 2:
            raise ValueError("ellipse grains are planar")
        if self.kind == "spheroid" and self.dim != 3:
            raise ValueError("spheroid grains live in R^3")

    @property
    def circumradius(self) -> float:
        if self.kind in ("ellipse", "spheroid"):
            return float(max(self.semi_axes))
        return float(self.radius)

    def sample_inverse_maps(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse linear maps T^{-1} of i.i.d. grains, shape (size, n, n)."""
        n = self.dim
        if self.kind == "disk":
            return np.broadcast_to(np.eye(n) / self.radius, (size, n, n)).copy()
        if self.kind == "random_disk":
            r = rng.uniform(self.radius_min, self.radius, size)
            return np.eye(n)[None] / r[:, None, None]
        a = np.asarray(self.semi_axes, dtype=float)
        if n == 2:
            t = rng.uniform(0.0, 2 * pi, size)
            c, s = np.cos(t), np.sin(t)
            R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], axis=1)
        else:
            R = Rotation.random(size, random_state=rng).as_matrix().reshape(size, 3, 3)
        # T = R diag(a), T^{-1} = diag(1/a) R^T
        return np.transpose(R, (0, 2, 1)) / a[None, :, None]

    def reference_grain(self):
        """A representative grain (unrotated) for closed-form truths."""
        if self.kind in ("ellipse", "spheroid"):
            return Ellipsoid(np.zeros(self.dim), np.asarray(self.semi_axes, dtype=float))
        return Ball(np.zeros(self.dim), self.radius)

    def mean_radius_power(self, p: float) -> float:
        """E[r^p] for the disk laws."""
        if self.kind == "disk":
            return self.radius**p
        a, b = self.radius_min, self.radius
        return (b ** (p + 1) - a ** (p + 1)) / ((p + 1) * (b - a)) if b > a else b**p

    @property
    def isotropic(self) -> bool:
        return True


# model and realizations ---------------------------------------------------------

@dataclass(frozen=True)
class ParticleProcessModel:
    intensity: float
    grains: GrainLaw
    window_lo: tuple
    window_hi: tuple
    margin: float | None = None

    def __post_init__(self):
        if not self.intensity > 0:
            raise ValueError("intensity must be positive")
        lo, hi = np.asarray(self.window_lo, float), np.asarray(self.window_hi, float)
        if lo.size != self.grains.dim or hi.size != lo.size or np.any(hi <= lo):
            raise ValueError("window must be a non-degenerate box of the grain dimension")
        m = self.grains.circumradius if self.margin is None else float(self.margin)
        if m < 0:
            raise ValueError("margin must be non-negative")
        object.__setattr__(self, "margin", m)

    @property
    def dim(self) -> int:
        return self.grains.dim

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.window_lo, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.window_hi, dtype=float)

    @property
    def simulation_volume(self) -> float:
        return float(np.prod(self.hi - self.lo + 2 * self.margin))

    def translated(self, t) -> ParticleProcessModel:
        t = np.asarray(t, dtype=float)
        return ParticleProcessModel(self.intensity, self.grains, tuple(self.lo + t),
                                    tuple(self.hi + t), self.margin)


@dataclass
class Realization:
    model: ParticleProcessModel
    centers: np.ndarray
    inverse_maps: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.centers.shape[0]


def simulate(model: ParticleProcessModel, rng: np.random.Generator) -> Realization:
    lo = model.lo - model.margin
    hi = model.hi + model.margin
    count = rng.poisson(model.intensity * model.simulation_volume)
    centers = lo + rng.uniform(size=(count, model.dim)) * (hi - lo)
    return Realization(model, centers, model.grains.sample_inverse_maps(rng, count))


def _segment_fits(model: ParticleProcessModel, mid: np.ndarray, u: np.ndarray, T: float) -> bool:
    ends = np.stack([mid - 0.5 * T * u, mid + 0.5 * T * u])
    return bool(np.all(ends >= model.lo - 1e-12) and np.all(ends <= model.hi + 1e-12))


def chord_midpoint_counts(X: Realization, U: np.ndarray, T: float, mid=None) -> np.ndarray:
    """Per direction row of U: grains whose chord midpoint lies on the centred test segment."""
    model = X.model
    mid = (model.lo + model.hi) / 2 if mid is None else np.asarray(mid, dtype=float)
    U = np.atleast_2d(U)
    for u in U:
        if not _segment_fits(model, mid, u, T):
            raise ValueError("test segment leaves the observation window")
    if len(X) == 0:
        return np.zeros(len(U))
    q = np.einsum("gij,gj->gi", X.inverse_maps, mid - X.centers)  # (G, n)
    d = np.einsum("gij,kj->kgi", X.inverse_maps, U)  # (K, G, n)
    dd = np.einsum("kgi,kgi->kg", d, d)
    qd = np.einsum("gi,kgi->kg", q, d)
    qq = np.einsum("gi,gi->g", q, q)
    tm = -qd / dd
    hit = qd * qd - dd * (qq[None, :] - 1.0) >= 0
    on = hit & (np.abs(tm) <= 0.5 * T)
    return on.sum(axis=1).astype(float)


def section_intensity(X: Realization, u, T: float, mid=None) -> float:
    """gamma_hat_L: chord midpoints on a test segment of length T along [u], per unit length."""
    u = np.asarray(getattr(u, "unit", u), dtype=float)
    return float(chord_midpoint_counts(X, u[None, :] / np.linalg.norm(u), T, mid)[0] / T)


def line_directions(n: int, lines: int, design: str, rng: np.random.Generator) -> np.ndarray:
    if design == "iid":
        return isotropic_directions(n, rng, lines)
    if design == "systematic":
        if n != 2:
            raise ValueError("systematic direction designs are planar")
        phi = rng.uniform(0.0, pi / lines) + np.arange(lines) * pi / lines
        return np.column_stack([np.cos(phi), np.sin(phi)])
    raise ValueError(f"unknown direction design {design!r}")


@dataclass(frozen=True)
class SpecificTensorEstimate:
    rank: int
    tensor: SymmetricTensor
    lines: int
    hits_per_line: np.ndarray


def specific_tensor_estimate(X: Realization, directions, T: float, s: int,
                             mid=None) -> SpecificTensorEstimate:
    """Average over directions of G_s(L) gamma_hat_L."""
    if s % 2:
        raise ValueError("line sections carry no odd-rank information; s must be even")
    U = np.atleast_2d(np.asarray([getattr(d, "unit", d) for d in directions], dtype=float))
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    counts = chord_midpoint_counts(X, U, T, mid)
    coeffs = (G_batch(U, s) * (counts / T)[:, None]).mean(axis=0)
    return SpecificTensorEstimate(s, SymmetricTensor(X.model.dim, s, coeffs), len(U), counts)


def process_design(model: ParticleProcessModel, s: int, lines: int, T: float,
                   design: str = "systematic"):
    """Closure for mc_run: one realization and one specific-tensor estimate per replication."""
    def run(rng, size):
        out = []
        for _ in range(size):
            X = simulate(model, rng)
            U = line_directions(model.dim, lines, design, rng)
            out.append(specific_tensor_estimate(X, U, T, s).tensor.coeffs)
        return np.array(out)

    return run


# truth -----------------------------------------------------------------------------

def isotropic_average(t: SymmetricTensor, nodes: int = 64) -> SymmetricTensor:
    """Average of ``t`` over all rotations: alpha Q^{s/2} with alpha the sphere mean of t(w,..,w)."""
    if t.rank % 2:
        return SymmetricTensor.zeros(t.dim, t.rank)
    Y, W = sphere_rule(t.dim, nodes)
    alpha = float(W @ (monomials(Y, t.rank) @ _eval_weights(t))) / float(W.sum())
    return tensor_power(metric_tensor(t.dim), t.rank // 2) * alpha


def _eval_weights(t: SymmetricTensor) -> np.ndarray:
    """Weights so that t(w, ..., w) = monomials(w) @ weights (multinomial multiplicities)."""
    from collections import Counter
    from math import factorial

    from .symtensor import multi_indices

    mult = []
    for idx in multi_indices(t.dim, t.rank):
        c = factorial(t.rank)
        for k in Counter(idx).values():
            c //= factorial(k)
        mult.append(c)
    return t.coeffs * np.array(mult, dtype=float)


def specific_tensor_truth(model: ParticleProcessModel, s: int, grain_reps: int = 0,
                          rng: np.random.Generator | None = None) -> SymmetricTensor:
    """gamma E[Phi_{n-1,0,s}(K)] over the grain law.

    Closed form for the shipped laws (disks scale as r^{n-1}; uniformly rotated
    grains average to a multiple of Q^{s/2}).  ``grain_reps > 0`` switches to a
    Monte-Carlo mean over sampled grains instead.
    """
    if s % 2:
        return SymmetricTensor.zeros(model.dim, s)
    g = model.grains
    n = model.dim
    q = QuadratureSpec(128, 128, "boundary-parametrization")
    if grain_reps > 0:
        rng = rng or np.random.default_rng(0)
        Ti = g.sample_inverse_maps(rng, grain_reps)
        acc = SymmetricTensor.zeros(n, s)
        for M in Ti:
            # T B^n = U S B^n; flipping a column of U keeps the body and makes U a rotation
            U, S, _ = np.linalg.svd(np.linalg.inv(M))
            if np.linalg.det(U) < 0:
                U[:, -1] = -U[:, -1]
            acc = acc + surface_tensor_smooth(Ellipsoid(np.zeros(n), S, U), s, q)
        return acc * (model.intensity / grain_reps)
    base = surface_tensor_smooth(g.reference_grain(), s, q)
    if g.kind in ("disk", "random_disk"):
        scale = g.mean_radius_power(n - 1) / g.radius ** (n - 1)
        return base * (model.intensity * scale)
    return isotropic_average(base) * model.intensity
