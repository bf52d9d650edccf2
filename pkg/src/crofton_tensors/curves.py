"""Second-moment curves for single-component estimation in the plane.

For a segment with endpoints +-(cos g, sin g) the support function is
|cos(phi - g)|; the curves below are the second-moment integrals of the
one-line estimators for that segment, for the diagonal component (P) and the
off-diagonal component (Q), under isotropic, f*-weighted and K-optimal lines.
Each curve has a closed form (where one exists) and a direct quadrature of
its defining integral.
"""

from __future__ import annotations

from math import acos, pi, sqrt

import numpy as np

KAPPA = acos(1.0 / sqrt(3.0))
M_CONST = (sqrt(2.0) + KAPPA) / (4 * pi) - 1.0 / 16
QF_NORM = 3.0 / (8 * pi)

KINDS = ("P_IUR", "P_fstar", "Q_IUR", "Q_fstar", "P_opt", "Q_opt")


# closed forms -------------------------------------------------------------------

def _fold_pi(g):
    """Map [0, pi] onto [0, pi/2] through g -> pi - g."""
    g = np.asarray(g, dtype=float)
    return np.where(g > pi / 2, pi - g, g)


def p_iur(g):
    c2 = np.cos(_fold_pi(g)) ** 2
    return (-0.375 * c2**2 + c2 + 0.5) / (20 * pi)


def p_fstar(g):
    g = _fold_pi(g)
    c, s = np.cos(g), np.sin(g)
    low = 2 * sqrt(2) / (3 * sqrt(3)) * c - 0.25 * c**2
    high = 0.25 * c**2 + s / (3 * sqrt(3))
    return M_CONST / pi * np.where(g <= pi / 2 - KAPPA, low, high)


def q_fstar(g):
    g = np.asarray(g, dtype=float)
    g = np.where(g > pi / 2, g - pi / 2, g)
    s, c = np.sin(g), np.cos(g)
    return 3 / (32 * pi**2) * (s + c - s * c)


def q_iur(g):
    g = np.asarray(g, dtype=float)
    return 3 / (320 * pi) * (4 - 0.5 * np.sin(2 * g) ** 2)


# defining integrals ----------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)
# endpoint-clustering map t -> (3t - t^3)/2 on [-1, 1]; removes sqrt endpoint singularities
_MAP_X = (3 * _GL_X - _GL_X**3) / 2
_MAP_W = _GL_W * 1.5 * (1 - _GL_X**2)


def _piecewise_mean(f, gammas, kinks) -> np.ndarray:
    """(1/2pi) int_0^{2pi} f(phi, gamma) dphi, split at fixed and gamma-dependent kinks."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    moving = np.stack([(gammas + pi / 2) % (2 * pi), (gammas + 3 * pi / 2) % (2 * pi)], axis=1)
    fixed = np.broadcast_to(np.asarray(kinks, dtype=float), (gammas.size, len(kinks)))
    edges = np.sort(np.concatenate([np.zeros((gammas.size, 1)), fixed, moving,
                                    np.full((gammas.size, 1), 2 * pi)], axis=1), axis=1)
    a, b = edges[:, :-1], edges[:, 1:]
    mid, half = (a + b) / 2, (b - a) / 2
    phi = mid[..., None] + half[..., None] * _MAP_X
    vals = f(phi, gammas[:, None, None])
    return np.sum(vals * _MAP_W * half[..., None], axis=(1, 2)) / (2 * pi)


_P_KINKS = (KAPPA, pi - KAPPA, pi + KAPPA, 2 * pi - KAPPA)
_Q_KINKS = (pi / 2, pi, 3 * pi / 2)


def _gp(phi):
    return 0.375 * np.abs(np.cos(phi) ** 2 - 1.0 / 3.0)


def _gq(phi):
    return 0.375 * np.abs(np.cos(phi) * np.sin(phi))


def p_iur_quad(g):
    return _piecewise_mean(lambda p, g: _gp(p) ** 2 * np.abs(np.cos(p - g)), g, _P_KINKS)


def p_fstar_quad(g):
    m = _piecewise_mean(lambda p, g: _gp(p) + 0 * g, np.zeros(1), _P_KINKS)[0]
    return m * _piecewise_mean(lambda p, g: _gp(p) * np.abs(np.cos(p - g)), g, _P_KINKS)


def q_iur_quad(g):
    return _piecewise_mean(lambda p, g: _gq(p) ** 2 * np.abs(np.cos(p - g)), g, _Q_KINKS)


def q_fstar_quad(g):
    m = _piecewise_mean(lambda p, g: _gq(p) + 0 * g, np.zeros(1), _Q_KINKS)[0]
    return m * _piecewise_mean(lambda p, g: _gq(p) * np.abs(np.cos(p - g)), g, _Q_KINKS)


def p_opt(g):
    return _piecewise_mean(lambda p, g: _gp(p) * np.sqrt(np.abs(np.cos(p - g))), g, _P_KINKS) ** 2


def q_opt(g):
    return _piecewise_mean(lambda p, g: _gq(p) * np.sqrt(np.abs(np.cos(p - g))), g, _Q_KINKS) ** 2


CLOSED = {"P_IUR": p_iur, "P_fstar": p_fstar, "Q_IUR": q_iur, "Q_fstar": q_fstar,
          "P_opt": p_opt, "Q_opt": q_opt}
QUADRATURE = {"P_IUR": p_iur_quad, "P_fstar": p_fstar_quad, "Q_IUR": q_iur_quad,
              "Q_fstar": q_fstar_quad, "P_opt": p_opt, "Q_opt": q_opt}


def variance_curves(kind: str, gamma, method: str = "closed"):
    """Curve value(s) at angle(s) ``gamma`` in [0, pi]; opt curves exist only as quadrature."""
    table = CLOSED if method == "closed" else QUADRATURE
    if kind not in table:
        raise ValueError(f"unknown curve {kind!r}; choose from {KINDS}")
    g = np.asarray(gamma, dtype=float)
    if np.any((g < 0) | (g > pi)):
        raise ValueError("gamma must lie in [0, pi]")
    out = table[kind](g)
    return float(np.asarray(out).reshape(-1)[0]) if np.ndim(gamma) == 0 else np.asarray(out).reshape(g.shape)


def extrema():
    """Extreme values of the off-diagonal curves."""
    return {
        "Q_fstar_min": 3 / (32 * pi**2) * (sqrt(2) - 0.5),
        "Q_fstar_max": 3 / (32 * pi**2),
        "Q_IUR_min": 21 / (640 * pi),
        "Q_IUR_max": 3 / (80 * pi),
    }
