"""Convex body models in R^2 and R^3.

Every body exposes a vectorized support function, projection volumes and a
line-hit predicate working on arrays of lines (origins and unit directions).
Tangent lines count as hits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.special import ellipe, elliprg

from .coeffs import kappa, omega
from .symtensor import LinearDirection

PLANE_TOL = 1e-12
DISC_TOL = 1e-14
AREA_TOL = 1e-14


def _unit(u) -> np.ndarray:
    if isinstance(u, LinearDirection):
        return u.unit
    return np.asarray(u, dtype=float)


def perp2(v: np.ndarray) -> np.ndarray:
    """Rotate planar vectors by +90 degrees (last axis)."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def rotation_matrix(axis: int, angle: float, n: int = 3) -> np.ndarray:
    """Rotation by ``angle`` in the coordinate plane orthogonal to e_axis (0-based); n=2 ignores axis."""
    c, s = np.cos(angle), np.sin(angle)
    if n == 2:
        return np.array([[c, -s], [s, c]])
    i, j = [k for k in range(3) if k != axis]
    R = np.eye(3)
    R[i, i], R[i, j], R[j, i], R[j, j] = c, -s, s, c
    return R


def euler_rotation(steps) -> np.ndarray:
    """Compose rotations given as (axis, angle) pairs, applied in the listed order (axes 1-based)."""
    R = np.eye(3)
    for axis, angle in steps:
        R = rotation_matrix(int(axis) - 1, float(angle)) @ R
    return R


# lines and flats ------------------------------------------------------------

@dataclass(frozen=True)
class AffineLine:
    direction: LinearDirection
    offset: np.ndarray

    def __post_init__(self):
        off = np.asarray(self.offset, dtype=float).reshape(-1)
        u = self.direction.unit
        if abs(off @ u) > PLANE_TOL * max(1.0, np.linalg.norm(off)):
            raise ValueError("offset must be orthogonal to the line direction")
        object.__setattr__(self, "offset", off)

    @classmethod
    def through(cls, point, direction) -> AffineLine:
        d = direction if isinstance(direction, LinearDirection) else LinearDirection(direction)
        p = np.asarray(point, dtype=float)
        return cls(d, p - (p @ d.unit) * d.unit)

    def translated(self, t) -> AffineLine:
        return AffineLine.through(self.offset + np.asarray(t, dtype=float), self.direction)


@dataclass(frozen=True)
class VerticalFlat2:
    """2-flat through ``offset`` spanned by the vertical axis and a second orthogonal direction."""

    vertical_axis: LinearDirection
    second_direction: LinearDirection
    offset: np.ndarray

    def __post_init__(self):
        a, b = self.vertical_axis.unit, self.second_direction.unit
        if abs(a @ b) > PLANE_TOL:
            raise ValueError("spanning directions must be orthogonal")
        off = np.asarray(self.offset, dtype=float)
        if abs(off @ a) > 1e-10 or abs(off @ b) > 1e-10:
            raise ValueError("offset must be orthogonal to the flat")
        object.__setattr__(self, "offset", off)

    @property
    def basis(self) -> np.ndarray:
        """3 x 2 matrix with the vertical axis and the second direction as columns."""
        return np.column_stack([self.vertical_axis.unit, self.second_direction.unit])

    def to_world(self, z) -> np.ndarray:
        return self.offset + np.asarray(z, dtype=float) @ self.basis.T

    def to_flat(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.offset) @ self.basis


# bodies ---------------------------------------------------------------------

class ConvexBody:
    dim: int

    def support(self, u) -> np.ndarray:
        raise NotImplementedError

    def width(self, u) -> np.ndarray:
        u = _unit(u)
        return self.support(u) + self.support(-u)

    def brightness(self, v) -> np.ndarray:
        """(n-1)-volume of the projection onto the hyperplane orthogonal to ``v``."""
        raise NotImplementedError

    def chord(self, origins, dirs):
        """Parameter interval (t0, t1) of the intersection with lines origins + t dirs, and a hit mask."""
        raise NotImplementedError

    def hits(self, origins, dirs) -> np.ndarray:
        return self.chord(origins, dirs)[2]

    def surface_content(self) -> float:
        """V_{n-1}: half the surface area."""
        raise NotImplementedError

    def inradius_circumradius(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def is_empty(self) -> bool:
        return False


@dataclass(frozen=True)
class Empty(ConvexBody):
    """Marker for an empty intersection; all functionals vanish."""

    dim: int

    @property
    def is_empty(self) -> bool:
        return True

    def support(self, u):
        u = np.asarray(_unit(u))
        return np.full(u.shape[:-1], -np.inf) if u.ndim > 1 else -np.inf

    def width(self, u):
        u = np.asarray(_unit(u))
        return np.zeros(u.shape[:-1]) if u.ndim > 1 else 0.0

    def brightness(self, v):
        return self.width(v)

    def chord(self, origins, dirs):
        n = np.atleast_2d(origins).shape[0]
        return np.full(n, np.nan), np.full(n, np.nan), np.zeros(n, dtype=bool)

    def surface_content(self):
        return 0.0


@dataclass(frozen=True)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(-1))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size

    def support(self, u):
        u = _unit(u)
        return u @ self.center + self.radius * np.linalg.norm(u, axis=-1)

    def brightness(self, v):
        v = np.asarray(_unit(v))
        val = kappa(self.dim - 1) * self.radius ** (self.dim - 1)
        return np.full(v.shape[:-1], val) if v.ndim > 1 else val

    def chord(self, origins, dirs):
        p = np.atleast_2d(origins) - self.center
        d = np.atleast_2d(dirs)
        a = np.einsum("ij,ij->i", d, d)
        b = np.einsum("ij,ij->i", p, d) / a
        disc = b * b - (np.einsum("ij,ij->i", p, p) - self.radius**2) / a
        hit = disc >= -DISC_TOL * self.radius**2
        root = np.sqrt(np.maximum(disc, 0.0))
        return -b - root, -b + root, hit

    def surface_content(self):
        return 0.5 * omega(self.dim) * self.radius ** (self.dim - 1)

    def inradius_circumradius(self):
        return self.radius, self.radius

    def translated(self, t):
        return Ball(self.center + np.asarray(t, dtype=float), self.radius)

    def scaled(self, lam):
        return Ball(self.center * lam, self.radius * lam)

    def rotated(self, R):
        return Ball(np.asarray(R) @ self.center, self.radius)


@dataclass(frozen=True)
class Ellipsoid(ConvexBody):
    """center + rotation @ diag(semi_axes) applied to the unit ball."""

    center: np.ndarray
    semi_axes: np.ndarray
    rotation: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        a = np.asarray(self.semi_axes, dtype=float).reshape(-1)
        if a.size != c.size or np.any(a <= 0):
            raise ValueError("need one positive semi-axis per coordinate")
        R = np.eye(c.size) if self.rotation is None else np.asarray(self.rotation, dtype=float)
        if not np.allclose(R.T @ R, np.eye(c.size), atol=1e-10):
            raise ValueError("rotation must be orthogonal")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "semi_axes", a)
        object.__setattr__(self, "rotation", R)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def linear_map(self) -> np.ndarray:
        return self.rotation * self.semi_axes

    @property
    def inverse_map(self) -> np.ndarray:
        return (self.rotation / self.semi_axes).T

    def support(self, u):
        u = _unit(u)
        return u @ self.center + np.linalg.norm(u @ self.linear_map, axis=-1)

    def brightness(self, v):
        v = _unit(v)
        det = float(np.prod(self.semi_axes))
        return kappa(self.dim - 1) * det * np.linalg.norm(v @ self.inverse_map.T, axis=-1)

    def chord(self, origins, dirs):
        Ti = self.inverse_map
        p = (np.atleast_2d(origins) - self.center) @ Ti.T
        d = np.atleast_2d(dirs) @ Ti.T
        a = np.einsum("ij,ij->i", d, d)
        b = np.einsum("ij,ij->i", p, d) / a
        disc = b * b - (np.einsum("ij,ij->i", p, p) - 1.0) / a
        hit = disc >= -DISC_TOL * np.max(self.semi_axes) ** 2
        root = np.sqrt(np.maximum(disc, 0.0))
        return -b - root, -b + root, hit

    def surface_content(self):
        a = self.semi_axes
        if self.dim == 2:
            big, small = max(a), min(a)
            return 2.0 * big * ellipe(1.0 - (small / big) ** 2)
        if self.dim == 3:
            return 2.0 * pi * float(np.prod(a)) * float(elliprg(*(1.0 / a**2)))
        raise NotImplementedError("surface content for n > 3")

    def inradius_circumradius(self):
        return float(np.min(self.semi_axes)), float(np.max(self.semi_axes))

    def translated(self, t):
        return Ellipsoid(self.center + np.asarray(t, dtype=float), self.semi_axes, self.rotation)

    def scaled(self, lam):
        return Ellipsoid(self.center * lam, self.semi_axes * lam, self.rotation)

    def rotated(self, R):
        R = np.asarray(R, dtype=float)
        return Ellipsoid(R @ self.center, self.semi_axes, R @ self.rotation)


@dataclass(frozen=True)
class Polytope(ConvexBody):
    """Polytope given by outward facet normals, support offsets, facet (n-1)-areas and vertices.

    ``loops`` keeps the facet vertex loops (3-D) for reference; planar polygons
    are built from a counterclockwise vertex list with :meth:`polygon`.
    """

    normals: np.ndarray
    offsets: np.ndarray
    areas: np.ndarray
    vertices: np.ndarray
    loops: tuple = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("normals", "offsets", "areas", "vertices"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not np.allclose(np.linalg.norm(self.normals, axis=1), 1.0, atol=1e-12):
            raise ValueError("facet normals must be unit vectors")
        if np.any(self.areas < AREA_TOL):
            raise ValueError("degenerate facet (area below tolerance)")
        closure = self.areas @ self.normals
        if np.max(np.abs(closure)) > 1e-9 * max(1.0, float(self.areas.sum())):
            raise ValueError(f"facet data violates the closure condition (sum = {closure})")

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @classmethod
    def polygon(cls, vertices) -> Polytope:
        V = np.asarray(vertices, dtype=float)
        E = np.roll(V, -1, axis=0) - V
        cross = E[:, 0] * np.roll(E, -1, axis=0)[:, 1] - E[:, 1] * np.roll(E, -1, axis=0)[:, 0]
        if np.any(cross <= 0):
            raise ValueError("polygon vertices must be in strictly convex counterclockwise order")
        lengths = np.linalg.norm(E, axis=1)
        normals = np.column_stack([E[:, 1], -E[:, 0]]) / lengths[:, None]
        offsets = np.einsum("ij,ij->i", normals, V)
        return cls(normals, offsets, lengths, V)

    @classmethod
    def from_facets(cls, facets) -> Polytope:
        """Facets as (outward unit normal, area, vertex loop) triples."""
        normals, areas, offsets, loops, verts = [], [], [], [], []
        for normal, area, loop in facets:
            normal = np.asarray(normal, dtype=float)
            loop = np.asarray(loop, dtype=float)
            d = loop @ normal
            if np.ptp(d) > 1e-9:
                raise ValueError("facet loop is not planar / orthogonal to its normal")
            normals.append(normal)
            areas.append(float(area))
            offsets.append(float(d.mean()))
            loops.append(loop)
            verts.extend(loop.tolist())
        V = np.unique(np.round(np.array(verts), 12), axis=0)
        return cls(np.array(normals), np.array(offsets), np.array(areas), V, tuple(loops))

    @classmethod
    def box(cls, lo, hi) -> Polytope:
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        n = lo.size
        if n == 2:
            return cls.polygon([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        if n != 3:
            raise ValueError("boxes are supported in n = 2, 3")
        ext = hi - lo
        facets = []
        for axis in range(3):
            i, j = [k for k in range(3) if k != axis]
            area = ext[i] * ext[j]
            for sign, level in ((-1.0, lo[axis]), (1.0, hi[axis])):
                normal = np.zeros(3)
                normal[axis] = sign
                loop = []
                for a, b in ((0, 0), (1, 0), (1, 1), (0, 1)):
                    x = np.zeros(3)
                    x[axis] = level
                    x[i] = lo[i] if a == 0 else hi[i]
                    x[j] = lo[j] if b == 0 else hi[j]
                    loop.append(x)
                facets.append((normal, area, loop))
        return cls.from_facets(facets)

    @classmethod
    def from_hull(cls, points) -> Polytope:
        """Convex hull of a point set (n = 2 or 3) via Qhull."""
        from scipy.spatial import ConvexHull

        P = np.asarray(points, dtype=float)
        hull = ConvexHull(P)
        if P.shape[1] == 2:
            return cls.polygon(P[hull.vertices])
        facets = {}
        for simplex, eq in zip(hull.simplices, hull.equations):
            key = tuple(np.round(eq, 10))
            facets.setdefault(key, []).append(simplex)
        out = []
        for key, simplices in facets.items():
            normal = np.array(key[:3])
            area = sum(0.5 * np.linalg.norm(np.cross(P[s[1]] - P[s[0]], P[s[2]] - P[s[0]])) for s in simplices)
            idx = np.unique(np.concatenate(simplices))
            pts = P[idx]
            c = pts.mean(axis=0)
            e1 = pts[0] - c
            e1 /= np.linalg.norm(e1)
            e2 = np.cross(normal, e1)
            ang = np.arctan2((pts - c) @ e2, (pts - c) @ e1)
            out.append((normal, area, pts[np.argsort(ang)]))
        return cls.from_facets(out)

    def support(self, u):
        return np.max(_unit(u) @ self.vertices.T, axis=-1)

    def brightness(self, v):
        v = _unit(v)
        return 0.5 * np.abs(v @ self.normals.T) @ self.areas

    def chord(self, origins, dirs):
        p = np.atleast_2d(origins)
        d = np.atleast_2d(dirs)
        num = self.offsets[None, :] - p @ self.normals.T
        den = d @ self.normals.T
        scale = max(1.0, float(np.max(np.abs(self.vertices))))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = num / den
        parallel = np.abs(den) < 1e-15
        upper = np.where(den > 0, ratio, np.inf)
        lower = np.where(den < 0, ratio, -np.inf)
        upper = np.where(parallel, np.inf, upper)
        lower = np.where(parallel, -np.inf, lower)
        t0, t1 = lower.max(axis=1), upper.min(axis=1)
        inside_parallel = np.all(~parallel | (num >= -PLANE_TOL * scale), axis=1)
        hit = (t0 <= t1 + PLANE_TOL * scale) & inside_parallel
        return t0, t1, hit

    def area_measure_atoms(self) -> list[tuple[np.ndarray, float]]:
        return [(nrm.copy(), float(a)) for nrm, a in zip(self.normals, self.areas)]

    def surface_content(self):
        return 0.5 * float(self.areas.sum())

    def inradius_circumradius(self):
        n = self.dim
        # largest inscribed ball: maximise r subject to <n_i, c> + r <= h_i
        res = linprog(
            c=np.r_[np.zeros(n), -1.0],
            A_ub=np.column_stack([self.normals, np.ones(len(self.offsets))]),
            b_ub=self.offsets,
            bounds=[(None, None)] * n + [(0, None)],
            method="highs",
        )
        r = float(-res.fun)
        if r <= 1e-12:
            raise ValueError("body is not full-dimensional")
        V = self.vertices
        c0 = V.mean(axis=0)
        R0 = float(np.max(np.linalg.norm(V - c0, axis=1)))
        sol = minimize(
            lambda x: x[-1],
            np.r_[c0, R0],
            constraints=[{"type": "ineq", "fun": lambda x: x[-1] ** 2 - np.sum((V - x[:-1]) ** 2, axis=1)}],
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 500},
        )
        R = float(np.max(np.linalg.norm(V - sol.x[:-1], axis=1))) if sol.success else R0
        return r, min(R, R0)

    def translated(self, t):
        t = np.asarray(t, dtype=float)
        loops = tuple(lp + t for lp in self.loops)
        return Polytope(self.normals, self.offsets + self.normals @ t, self.areas, self.vertices + t, loops)

    def scaled(self, lam):
        loops = tuple(lp * lam for lp in self.loops)
        return Polytope(self.normals, self.offsets * lam, self.areas * lam ** (self.dim - 1), self.vertices * lam, loops)

    def rotated(self, R):
        R = np.asarray(R, dtype=float)
        loops = tuple(lp @ R.T for lp in self.loops)
        return Polytope(self.normals @ R.T, self.offsets, self.areas, self.vertices @ R.T, loops)


@dataclass(frozen=True)
class Segment(ConvexBody):
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))

    @property
    def dim(self) -> int:
        return self.p.size

    def support(self, u):
        u = _unit(u)
        return np.maximum(u @ self.p, u @ self.q)

    def brightness(self, v):
        if self.dim != 2:
            v = np.asarray(_unit(v))
            return np.zeros(v.shape[:-1]) if v.ndim > 1 else 0.0
        return self.width(perp2(_unit(v)))

    def chord(self, origins, dirs):
        if self.dim != 2:
            raise NotImplementedError("segment line hits are implemented in the plane only")
        o = np.atleast_2d(origins)
        nrm = perp2(np.atleast_2d(dirs))
        sp = np.einsum("ij,ij->i", self.p - o, nrm)
        sq = np.einsum("ij,ij->i", self.q - o, nrm)
        hit = sp * sq <= DISC_TOL
        return np.full(len(o), np.nan), np.full(len(o), np.nan), hit

    def surface_content(self):
        return float(np.linalg.norm(self.q - self.p)) if self.dim == 2 else 0.0

    def inradius_circumradius(self):
        raise ValueError("a segment has no interior")


# free functions mirroring the operation list -------------------------------

def support(K: ConvexBody, u):
    return K.support(u)


def width(K: ConvexBody, u):
    return K.width(u)


def brightness(K: ConvexBody, v):
    return K.brightness(v)


def line_hits(K: ConvexBody, E: AffineLine) -> int:
    return int(K.hits(E.offset[None, :], E.direction.unit[None, :])[0])


def area_measure_atoms(P: Polytope):
    return P.area_measure_atoms()


def inradius_circumradius(K: ConvexBody):
    return K.inradius_circumradius()


def _clip_polygon(poly: np.ndarray, a: np.ndarray, h: float) -> np.ndarray:
    """Sutherland-Hodgman step: keep the part of ``poly`` with <a, z> <= h."""
    if len(poly) == 0:
        return poly
    out = []
    vals = poly @ a - h
    for k in range(len(poly)):
        cur, nxt = poly[k], poly[(k + 1) % len(poly)]
        fc, fn = vals[k], vals[(k + 1) % len(poly)]
        if fc <= 0:
            out.append(cur)
        if (fc < 0 < fn) or (fn < 0 < fc):
            out.append(cur + (nxt - cur) * (fc / (fc - fn)))
    return np.array(out)


def flat_section(K: ConvexBody, H: VerticalFlat2) -> ConvexBody:
    """Intersection of a 3-D body with a 2-flat, in the flat's coordinates (vertical, second)."""
    if K.dim != 3:
        raise ValueError("flat sections are defined for n = 3")
    P = H.basis
    if isinstance(K, Ball):
        rel = K.center - H.offset
        z0 = rel @ P
        rho2 = K.radius**2 - (rel @ rel - z0 @ z0)
        if rho2 <= 0:
            return Empty(2)
        return Ball(z0, np.sqrt(rho2))
    if isinstance(K, Ellipsoid):
        Ti = K.inverse_map
        B = Ti @ P
        g = Ti @ (H.offset - K.center)
        M = B.T @ B
        z0 = -np.linalg.solve(M, B.T @ g)
        r2 = 1.0 - g @ g + z0 @ M @ z0
        if r2 <= 0:
            return Empty(2)
        lam, V = np.linalg.eigh(M / r2)
        if np.linalg.det(V) < 0:
            V[:, 1] = -V[:, 1]
        return Ellipsoid(z0, 1.0 / np.sqrt(lam), V)
    if isinstance(K, Polytope):
        z = H.to_flat(K.vertices)
        R = float(np.max(np.abs(z))) + 1.0
        poly = np.array([[-R, -R], [R, -R], [R, R], [-R, R]])
        A = K.normals @ P
        hh = K.offsets - K.normals @ H.offset
        for a, h in zip(A, hh):
            if np.linalg.norm(a) < 1e-15:
                if h < 0:
                    return Empty(2)
                continue
            poly = _clip_polygon(poly, a, h)
            if len(poly) < 3:
                return Empty(2)
        # drop near-duplicate vertices left by clipping through existing corners
        keep = [poly[0]]
        for v in poly[1:]:
            if np.linalg.norm(v - keep[-1]) > 1e-12:
                keep.append(v)
        if len(keep) > 1 and np.linalg.norm(keep[0] - keep[-1]) <= 1e-12:
            keep.pop()
        poly = np.array(keep)
        if len(poly) < 3:
            return Empty(2)
        area = 0.5 * np.sum(poly[:, 0] * np.roll(poly[:, 1], -1) - poly[:, 1] * np.roll(poly[:, 0], -1))
        if area < AREA_TOL:
            return Empty(2)
        # remove collinear vertices so the polygon constructor sees strict convexity
        E = np.roll(poly, -1, axis=0) - poly
        Eprev = np.roll(E, 1, axis=0)
        cross = Eprev[:, 0] * E[:, 1] - Eprev[:, 1] * E[:, 0]
        poly = poly[cross > 1e-14]
        return Polytope.polygon(poly)
    raise TypeError(f"no section rule for {type(K).__name__}")
