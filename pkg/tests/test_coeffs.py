from fractions import Fraction
from math import pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crofton_tensors.coeffs import (
    C_normalizer,
    CroftonTable,
    G_batch,
    G_s,
    alternating_sum_check,
    c_coeff,
    c_matrix,
    d_matrix,
    kappa,
    lemma32_check,
    omega,
)
from crofton_tensors.symtensor import LinearDirection, line_metric, metric_tensor, trace


def test_omega_kappa():
    assert omega(1) == pytest.approx(2)
    assert omega(3) == pytest.approx(4 * pi)
    assert omega(5) == pytest.approx(8 * pi**2 / 3)
    assert kappa(2) == pytest.approx(pi)
    # large index through log-gamma stays finite
    assert np.isfinite(omega(61))


def test_leading_coefficients():
    assert c_coeff(0, 0) == pytest.approx(2, rel=1e-12)
    assert c_coeff(1, 1) == pytest.approx(8 * pi, rel=1e-12)
    assert c_coeff(2, 2) == pytest.approx(-64 * pi**2 / 3, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_normalizers(n):
    assert C_normalizer(0, n) == pytest.approx(2 * pi * omega(n) / omega(n + 1), rel=1e-12)
    assert C_normalizer(2, n) == pytest.approx(16 * pi**3 * omega(n) / omega(n + 3), rel=1e-12)
    assert C_normalizer(4, n) == pytest.approx(256 * pi**5 * omega(n) / (3 * omega(n + 5)), rel=1e-12)
    with pytest.raises(ValueError):
        C_normalizer(3, n)


def test_d_entries():
    d = d_matrix(4)
    assert d[0, 0] == pytest.approx(0.5)
    assert d[1, 0] == pytest.approx(-1 / (8 * pi))
    assert d[1, 1] == pytest.approx(1 / (8 * pi))
    assert d[2, 2] == pytest.approx(-3 / (64 * pi**2), rel=1e-12)
    # the printed alternative would break D C = I
    bad = d.copy()
    bad[2, 2] = -3 * pi**2 / 64
    assert np.abs(bad @ c_matrix(2) - np.eye(3)).max() > 1


@pytest.mark.parametrize("s", range(0, 22, 2))
def test_d_inverts_c(s):
    assert np.abs(d_matrix(s) @ c_matrix(s // 2) - np.eye(s // 2 + 1)).max() < 1e-10


def test_c_signs_alternate_and_diagonal_nonzero():
    for m in range(11):
        assert c_coeff(m, m) != 0
        signs = [np.sign(c_coeff(m, k)) for k in range(m + 1)]
        # (-1)^k / (1 - 2k): positive at k = 0, then (-1)^(k+1)
        assert signs[0] > 0
        for k in range(1, m + 1):
            assert signs[k] == (-1) ** (k + 1), (m, k)


def test_G0_and_G2_closed_forms():
    for n in (2, 3):
        u = LinearDirection(np.eye(n)[0])
        assert G_s(u, n, 0).coeffs[0] == pytest.approx(pi * omega(n) / omega(n + 1))
        G2 = G_s(u, n, 2)
        expect = ((n + 1) * line_metric(u) - metric_tensor(n)) * (omega(n) / (4 * omega(n + 1)))
        assert G2.allclose(expect, rtol=1e-12)
    G2 = G_s(LinearDirection([1.0, 0.0]), 2, 2)
    assert np.allclose(G2.matrix(), [[0.25, 0], [0, -0.125]])


@given(st.floats(0, 2 * pi), st.floats(0, pi))
def test_G2_trace(phi, theta):
    u = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    if np.linalg.norm(u) < 0.5:
        return
    G2 = G_s(LinearDirection(u), 3, 2)
    assert trace(G2).coeffs[0] == pytest.approx(omega(3) / (4 * omega(4)), rel=1e-12)


@pytest.mark.parametrize("n,s", [(2, 2), (2, 4), (3, 4), (3, 6)])
def test_batch_matches_single(n, s):
    rng = np.random.default_rng(s)
    U = rng.normal(size=(5, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    B = G_batch(U, s)
    for k in range(5):
        assert np.allclose(B[k], G_s(U[k], n, s).coeffs, atol=1e-14)


def test_odd_rank_rejected():
    with pytest.raises(ValueError):
        G_s(np.array([1.0, 0.0]), 2, 3)
    with pytest.raises(ValueError):
        CroftonTable.build(2, 5)


def test_lemma_examples():
    assert lemma32_check(0, 0) == 0
    assert lemma32_check(2, 1) == 0
    assert lemma32_check(15, 7) == 0
    assert isinstance(lemma32_check(5, 2), Fraction)


def test_alternating_sum_examples():
    assert alternating_sum_check(0) < 1e-15
    assert alternating_sum_check(1) < 1e-14
    assert alternating_sum_check(10) <= 1e-10
