"""Fast versions of the numerical contracts, for ``crofton-tensors selfcheck``."""

from __future__ import annotations

from math import pi

import numpy as np

from .coeffs import alternating_sum_check, c_coeff, c_matrix, d_matrix, lemma32_check
from .curves import CLOSED, QUADRATURE, extrema
from .ground_truth import QuadratureSpec, inverse_crofton_oracle, rel_gap, surface_tensor
from .bodies import Ellipsoid, Polytope
from .symtensor import LinearDirection, line_metric, metric_tensor, rank2_spectrum


def _rel(a, b):
    return abs(a - b) / abs(b)


def run_selfcheck(workers: int = 1) -> list[tuple[str, bool, str]]:
    out = []

    g = max(_rel(c_coeff(0, 0), 2.0), _rel(c_coeff(1, 1), 8 * pi), _rel(c_coeff(2, 2), -64 * pi**2 / 3))
    out.append(("leading coefficients", g < 1e-12, f"max rel err {g:.2e}"))

    err = max(float(np.max(np.abs(d_matrix(s) @ c_matrix(s // 2) - np.eye(s // 2 + 1)))) for s in range(0, 21, 2))
    out.append(("D C = I (s <= 20)", err < 1e-10, f"max abs err {err:.2e}"))

    g = _rel(d_matrix(4)[2, 2], -3 / (64 * pi**2))
    out.append(("d22", g < 1e-12, f"rel err {g:.2e}"))

    bad = [(n, m) for n in range(13) for m in range(n + 1) if lemma32_check(n, m) != 0]
    out.append(("binomial lemma (n <= 12, exact)", not bad, f"failures {bad[:3]}"))

    err = max(alternating_sum_check(m) for m in range(31))
    out.append(("alternating sum (m <= 30)", err < 1e-10, f"max abs err {err:.2e}"))

    worst = 0.0
    for n in (2, 3):
        for u in np.eye(n):
            ev = np.sort(rank2_spectrum((n + 1) * line_metric(LinearDirection(u)) - metric_tensor(n)))
            worst = max(worst, float(np.max(np.abs(ev - np.array([-1.0] * (n - 1) + [n])))))
    out.append(("spectrum of (n+1)Q(L) - Q", worst < 1e-12, f"max abs err {worst:.2e}"))

    gam = np.linspace(0, pi, 201)
    err = max(float(np.max(np.abs(CLOSED[k](gam) - QUADRATURE[k](gam)))) for k in ("P_IUR", "P_fstar", "Q_IUR", "Q_fstar"))
    out.append(("variance curves closed vs quadrature", err < 1e-8, f"max abs err {err:.2e}"))
    ex = extrema()
    g = max(_rel(float(CLOSED["Q_fstar"](pi / 4)), ex["Q_fstar_min"]), _rel(float(CLOSED["Q_IUR"](pi / 4)), ex["Q_IUR_min"]))
    out.append(("curve minima", g < 1e-10, f"max rel err {g:.2e}"))

    q = QuadratureSpec(512, 128)
    for name, K in (("square", Polytope.polygon([[0, 0], [1, 0], [1, 1], [0, 1]])),
                    ("ellipse(2,1)", Ellipsoid(np.zeros(2), np.array([2.0, 1.0])))):
        g = rel_gap(inverse_crofton_oracle(K, 2, q, workers), surface_tensor(K, 2))
        out.append((f"inverse Crofton oracle, {name}, s=2", g < 1e-3, f"rel gap {g:.2e}"))
    return out
