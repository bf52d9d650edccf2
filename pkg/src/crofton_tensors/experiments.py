"""Reproductions of the worked examples and figures, shared by the CLI, scripts and tests."""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from .bodies import Ellipsoid, Polytope, euler_rotation
from .coeffs import kappa
from .estimators import (
    DirectionDensity,
    ReferenceSet,
    component_index,
    iur_design,
    orthogonal_frames,
    projection_batch,
    projection_design,
    systematic_posdef_curve,
    weighted_batch,
)
from .ground_truth import surface_tensor
from .mc import bootstrap_var_ci, mc_run, mc_samples


# Figure 1: systematic planar design -------------------------------------------------

def figure1_bodies(eps: float = 0.1) -> dict:
    """The three origin-symmetric bodies, labelled by their vertex/matrix data."""
    return {
        "K1": Polytope.polygon([[1, -eps], [1, eps], [-1, eps], [-1, -eps]]),
        "K2": Polytope.polygon([[1, 0], [0, eps], [-1, 0], [0, -eps]]),
        # x^T diag(1, 1/sqrt(eps)) x <= 1
        "K3": Ellipsoid(np.zeros(2), np.array([1.0, eps**0.25])),
    }


def figure1(eps: float = 0.1, grid: int = 500, N_max: int = 12) -> dict:
    Ns = np.arange(1, N_max + 1)
    return {"N": Ns, **{k: systematic_posdef_curve(K, Ns, grid) for k, K in figure1_bodies(eps).items()}}


# ellipse orthogonal-pair probability -------------------------------------------------

def ellipse_orthogonal_pair(k: float, draws: int, seed: int, workers: int | None = None) -> float:
    """Empirical probability that the two-line orthogonal projection estimator is positive definite."""
    K = Ellipsoid(np.zeros(2), np.array([1.0, k]))

    def run(rng, size):
        F = orthogonal_frames(2, rng, size)
        T = (projection_batch(K, F[:, 0], 2) + projection_batch(K, F[:, 1], 2)) / 2
        a, b, c = T[:, 0], T[:, 1], T[:, 2]
        return ((a > 0) & (a * c - b * b > 0)).astype(float)

    return float(mc_samples(run, draws, seed, workers).mean())


# Figure 2 / 3-D example ----------------------------------------------------------------

HIT_PROBABILITY = 1.0 / 7.0


def example_spheroid(l: float) -> Ellipsoid:
    R = euler_rotation([(1, 3 * pi / 16), (2, 5 * pi / 16)])
    return Ellipsoid(np.zeros(3), np.array([1.0, 1.0, float(l)]), R)


def reference_radius(K, p: float = HIT_PROBABILITY) -> float:
    """Ball radius R with V_2(K) / V_2(R B^3) = p."""
    V2 = float(surface_tensor(K, 0).coeffs[0])
    return sqrt(V2 / (p * 2 * pi))


DESIGNS = ("hitmiss1", "hitmiss3_orth", "hitmiss3_iid", "proj1", "proj3_orth")


def design_closure(name: str, K, A: ReferenceSet, s: int = 2):
    return {
        "hitmiss1": lambda: iur_design(K, A, s, 1),
        "hitmiss3_orth": lambda: iur_design(K, A, s, 3, "orthogonal"),
        "hitmiss3_iid": lambda: iur_design(K, A, s, 3),
        "proj1": lambda: projection_design(K, s, 1),
        "proj3_orth": lambda: projection_design(K, s, 3, "orthogonal"),
    }[name]()


@dataclass
class Figure2Row:
    l: int
    design: str
    component: str
    truth: float
    mean: float
    sd: float
    cv: float


def figure2(ls=(1, 2, 3, 4, 5), reps: int = 100_000, seed: int = 44,
            workers: int | None = None) -> list[Figure2Row]:
    from .symtensor import multi_indices

    rows = []
    for l in ls:
        K = example_spheroid(l)
        A = ReferenceSet.ball(np.zeros(3), reference_radius(K))
        truth = surface_tensor(K, 2).coeffs
        for di, d in enumerate(DESIGNS):
            S = mc_run(design_closure(d, K, A), reps, seed * 1000 + 10 * l + di, workers)
            cv = S.cv_against(truth)
            for k, idx in enumerate(multi_indices(3, 2)):
                rows.append(Figure2Row(l, d, "".join(str(i + 1) for i in idx), float(truth[k]),
                                       float(S.mean[k]), float(S.sd[k]), float(cv[k])))
    return rows


def figure2_ratios(rows: list[Figure2Row], off_diag_tol: float = 1e-9) -> dict:
    """Median CV ratios between designs over components (and l) where the truth is non-zero."""
    table = {(r.l, r.design, r.component): r for r in rows}
    ls = sorted({r.l for r in rows})
    comps = sorted({r.component for r in rows})

    def ratios(num, den, lset):
        out = []
        for l in lset:
            for c in comps:
                a, b = table[(l, num, c)], table[(l, den, c)]
                if abs(a.truth) > off_diag_tol and np.isfinite(a.cv) and b.cv > 0:
                    out.append(a.cv / b.cv)
        return np.array(out)

    big = [l for l in ls if l >= 2]
    res = {
        "proj1/hitmiss1": float(np.median(ratios("proj1", "hitmiss1", ls))),
        "proj3_orth/hitmiss3_orth": float(np.median(ratios("proj3_orth", "hitmiss3_orth", big))) if big else float("nan"),
        "hitmiss3_orth/hitmiss3_iid": float(np.median(ratios("hitmiss3_orth", "hitmiss3_iid", ls))),
        "proj3_orth/hitmiss3_iid": float(np.median(ratios("proj3_orth", "hitmiss3_iid", big))) if big else float("nan"),
    }
    if 1 in ls:
        res["ball_proj3_orth_maxvar"] = max(table[(1, "proj3_orth", c)].sd ** 2 for c in comps)
    return res


# importance sampling comparison -------------------------------------------------------

def planar_test_bodies() -> dict:
    """Planar test bodies with enclosing reference balls (centre, radius)."""
    return {
        "disk": (Ellipsoid(np.zeros(2), np.array([1.0, 1.0])), (0.0, 0.0), 1.0),
        "square": (Polytope.polygon([[0, 0], [1, 0], [1, 1], [0, 1]]), (0.5, 0.5), sqrt(0.5)),
        "ellipse21": (Ellipsoid(np.zeros(2), np.array([2.0, 1.0])), (0.0, 0.0), 2.0),
    }


def adversarial_densities() -> dict:
    return {
        "tilted": DirectionDensity(lambda p: 1 + 0.9 * np.cos(2 * (p - 0.3)), name="tilted"),
        "peaked": DirectionDensity(lambda p: 0.05 + np.sin(p) ** 8, name="peaked"),
    }


@dataclass
class WeightedComparison:
    body: str
    component: tuple
    design: str
    var: float
    ci: tuple
    mean: float
    se: float
    truth: float


def importance_comparison(reps: int = 1_000_000, seed: int = 7, workers: int | None = None,
                          bootstrap: int = 200, level: float = 0.99, extra: bool = True,
                          bootstrap_designs=("iur", "fstar")) -> list[WeightedComparison]:
    """Variances of single-component estimators under uniform, f*, f*_K (and adversarial) lines,
    plus the mean of three independent IUR lines.  Bootstrap intervals are computed for
    ``bootstrap_designs`` only (the others get nan bounds)."""
    out = []
    for bi, (name, (K, c, R)) in enumerate(planar_test_bodies().items()):
        A = ReferenceSet.ball(c, R)
        truth = surface_tensor(K, 2).coeffs
        for ci_, ij in enumerate([(1, 1), (1, 2), (2, 2)]):
            designs = {
                "iur": DirectionDensity.uniform(),
                "fstar": DirectionDensity.fstar(ij),
                "fstarK": DirectionDensity.fstar_K(K, R, ij),
            }
            if extra:
                designs.update(adversarial_densities())
            t = float(truth[component_index(2, ij)])
            for di, (dname, dens) in enumerate(designs.items()):
                x = mc_samples(weighted_batch(K, A, ij, dens), reps, seed + 100 * bi + 10 * ci_ + di, workers)[:, 0]
                nb = bootstrap if dname in bootstrap_designs else 0
                out.append(_summ(name, ij, dname, x, t, nb, level, seed + di))
            run1 = weighted_batch(K, A, ij, DirectionDensity.uniform())
            three = lambda rng, size: (run1(rng, size) + run1(rng, size) + run1(rng, size)) / 3
            x = mc_samples(three, reps, seed + 100 * bi + 10 * ci_ + 9, workers)[:, 0]
            nb = bootstrap if "iur3" in bootstrap_designs else 0
            out.append(_summ(name, ij, "iur3", x, t, nb, level, seed + 9))
    return out


def _summ(name, ij, dname, x, t, bootstrap, level, seed) -> WeightedComparison:
    ci = bootstrap_var_ci(x, level, bootstrap, seed) if bootstrap else (np.nan, np.nan)
    return WeightedComparison(name, ij, dname, float(np.var(x, ddof=1)), ci, float(x.mean()),
                              float(x.std(ddof=1) / np.sqrt(len(x))), t)
