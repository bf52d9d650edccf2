import itertools
from math import sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crofton_tensors.symtensor import (
    LinearDirection,
    SymmetricTensor,
    is_positive_definite,
    line_metric,
    metric_tensor,
    multi_indices,
    n_components,
    rank2_spectrum,
    rotate,
    sym_product,
    tensor_power,
    trace,
)

e1, e2, e3 = np.eye(3)
E1, E2 = np.eye(2)

unit_vectors = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
    lambda v: np.linalg.norm(v) > 0.1
).map(lambda v: np.asarray(v) / np.linalg.norm(v))


def small_tensor(n, p):
    return st.lists(st.floats(-3, 3, allow_nan=False), min_size=n_components(n, p),
                    max_size=n_components(n, p)).map(lambda c: SymmetricTensor(n, p, np.array(c)))



def _sym(t):
    from math import factorial

    p = t.ndim
    return sum(np.transpose(t, perm) for perm in itertools.permutations(range(p))) / factorial(p)


def test_component_counts():
    assert n_components(2, 4) == 5
    assert n_components(3, 2) == 6
    assert len(multi_indices(3, 3)) == 10


def test_metric_examples():
    Q2, Q3 = metric_tensor(2), metric_tensor(3)
    assert Q2(E1, E1) == 1
    assert Q3(e1, e2) == 0
    assert Q3(np.array([1, 2, 3.0]), np.array([4, 5, 6.0])) == 32


def test_product_examples():
    Q = metric_tensor(2)
    assert sym_product(Q, Q)(E1, E1, E1, E1) == pytest.approx(1.0)
    x, y = SymmetricTensor.vector_power(E1, 1), SymmetricTensor.vector_power(E2, 1)
    assert sym_product(x, y)(E1, E2) == pytest.approx(0.5)
    u = np.array([1.0, 1.0]) / sqrt(2)
    assert SymmetricTensor.vector_power(u, 2)(E1, E2) == pytest.approx(0.5)


def test_line_metric_examples():
    L = line_metric(LinearDirection(E1))
    assert L(E1, E1) == 1 and L(E2, E2) == 0
    assert line_metric(LinearDirection([1.0, 1.0]))(E1, E2) == pytest.approx(0.5)


def test_tensor_power_examples():
    Q = metric_tensor(2)
    assert tensor_power(Q, 0).rank == 0 and tensor_power(Q, 0).coeffs[0] == 1
    assert tensor_power(Q, 1).max_abs_diff(Q) == 0
    assert tensor_power(Q, 2)(E1, E1, E2, E2) == pytest.approx(1 / 3, abs=1e-15)


def test_spectrum_examples():
    assert np.allclose(np.sort(rank2_spectrum(metric_tensor(2))), [1, 1])
    assert np.allclose(np.sort(rank2_spectrum(line_metric(LinearDirection(E1)))), [0, 1])
    t = 4 * line_metric(LinearDirection([0.3, -0.2, 0.9])) - metric_tensor(3)
    assert np.allclose(np.sort(rank2_spectrum(t)), [-1, -1, 3], atol=1e-12)


@given(unit_vectors)
def test_pivot_spectrum_property(u):
    for n, v in ((2, u[:2] if np.linalg.norm(u[:2]) > 1e-3 else E1), (3, u)):
        t = (n + 1) * line_metric(LinearDirection(v)) - metric_tensor(n)
        ev = np.sort(rank2_spectrum(t))
        assert np.allclose(ev, [-1.0] * (n - 1) + [n], atol=1e-12)


@given(small_tensor(3, 2), small_tensor(3, 1))
def test_sym_product_commutes(a, b):
    assert sym_product(a, b).max_abs_diff(sym_product(b, a)) == 0.0


@pytest.mark.parametrize("n,p,q", [(2, 1, 1), (2, 2, 2), (3, 1, 2), (3, 2, 2), (3, 1, 3), (2, 3, 1)])
def test_sym_product_matches_brute_force(n, p, q):
    rng = np.random.default_rng(n * 100 + p * 10 + q)
    a = SymmetricTensor(n, p, rng.normal(size=n_components(n, p)))
    b = SymmetricTensor(n, q, rng.normal(size=n_components(n, q)))
    brute = _sym(np.multiply.outer(a.to_array(), b.to_array()))
    assert np.allclose(sym_product(a, b).to_array(), brute, atol=1e-13)


@given(unit_vectors)
def test_line_metric_sign_invariant(u):
    assert line_metric(LinearDirection(u)).max_abs_diff(line_metric(LinearDirection(-u))) == 0.0
    assert np.trace(line_metric(LinearDirection(u)).matrix()) == pytest.approx(1.0)


def test_rotation_and_trace():
    R = np.array([[0, -1.0], [1.0, 0]])
    t = line_metric(LinearDirection(E1))
    assert rotate(t, R).allclose(line_metric(LinearDirection(E2)))
    assert trace(metric_tensor(3)).coeffs[0] == pytest.approx(3.0)


def test_posdef_threshold():
    assert is_positive_definite(metric_tensor(2))
    assert not is_positive_definite(line_metric(LinearDirection(E1)))
    assert not is_positive_definite(SymmetricTensor(2, 2, np.array([1.0, 0.0, 1e-12])))


def test_csv_rows_use_17_digits():
    rows = SymmetricTensor(2, 2, np.array([1 / 3, 0.0, 2.0])).csv_rows()
    assert rows[0][0] == "1-1" and rows[0][1] == f"{1/3:.17g}"
