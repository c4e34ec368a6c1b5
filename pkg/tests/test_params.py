"""Forward maps, support validation, sampling, and the path-sum oracle."""

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semident import linalg
from semident.errors import (
    NotPositiveDefiniteError,
    SupportViolationError,
)
from semident.graphs import MixedGraph
from semident.params import (
    check_lambda_support,
    check_omega_support,
    i_minus_lambda_inv,
    kappa,
    matrix_from_json,
    matrix_to_json,
    path_inverse,
    phi,
    sample_parameters,
)


def _random_dag(m, rng, p=0.5):
    directed = frozenset(
        (i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1) if rng.random() < p
    )
    bidirected = frozenset(
        (i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1) if rng.random() < p
    )
    return MixedGraph(m=m, directed=directed, bidirected=bidirected)


def test_support_checks(iv_graph):
    lam = np.zeros((3, 3))
    lam[0, 2] = 1.0  # 1 -> 3 is not an edge
    with pytest.raises(SupportViolationError):
        check_lambda_support(iv_graph, lam)
    omega = np.eye(3)
    omega[0, 1] = omega[1, 0] = 0.5  # 1 <-> 2 is not an edge
    with pytest.raises(SupportViolationError):
        check_omega_support(iv_graph, omega)
    omega = np.eye(3)
    omega[1, 2] = 0.5  # asymmetric
    with pytest.raises(SupportViolationError):
        check_omega_support(iv_graph, omega)


def test_omega_must_be_pd(iv_graph):
    omega = np.eye(3)
    omega[1, 2] = omega[2, 1] = 2.0
    with pytest.raises(NotPositiveDefiniteError):
        check_omega_support(iv_graph, omega)


def test_phi_two_node_closed_form():
    g = MixedGraph(m=2, directed={(1, 2)})
    lam = np.array([[0.0, 0.7], [0.0, 0.0]])
    omega = np.diag([2.0, 3.0])
    sigma = phi(g, lam, omega)
    # (I - Lambda)^{-T} Omega (I - Lambda)^{-1} worked out by hand
    assert sigma == pytest.approx(
        np.array([[2.0, 1.4], [1.4, 3.0 + 2.0 * 0.49]])
    )


def test_kappa_is_inverse_of_phi():
    rng = random.Random(11)
    for _ in range(20):
        g = _random_dag(rng.randint(2, 6), rng)
        lam, _ = sample_parameters(g, rng.randint(0, 10**6))
        delta = [rng.uniform(0.5, 2.0) for _ in range(g.m)]
        # kappa(L, D) must equal phi(L, D^{-1})^{-1} on the bidirected-free graph
        bare = MixedGraph(m=g.m, directed=g.directed)
        k = kappa(bare, lam, delta)
        omega_inv = np.diag([1.0 / d for d in delta])
        assert np.allclose(k, np.linalg.inv(phi(bare, lam, omega_inv)), atol=1e-10)


def test_kappa_rejects_nonpositive_delta(iv_graph):
    lam = np.zeros((3, 3))
    with pytest.raises(NotPositiveDefiniteError):
        kappa(iv_graph, lam, [1.0, -1.0, 1.0])


def test_path_inverse_exact_chain():
    g = MixedGraph(m=3, directed={(1, 2), (2, 3)})
    lam = linalg.zeros(3, 3, "rational")
    lam[0, 1] = Fraction(2)
    lam[1, 2] = Fraction(3)
    inv = path_inverse(g, lam)
    # single path 1 -> 2 -> 3 contributes the product 6
    assert inv[0, 2] == Fraction(6)
    assert inv[0, 1] == Fraction(2)
    assert all(inv[i, i] == 1 for i in range(3))


def test_path_inverse_matches_numeric_inverse():
    rng = random.Random(5)
    for _ in range(50):
        g = _random_dag(rng.randint(2, 7), rng)
        lam, _ = sample_parameters(g, rng.randint(0, 10**6))
        direct = np.linalg.inv(np.eye(g.m) - lam)
        assert np.max(np.abs(path_inverse(g, lam) - direct)) <= 1e-12


def test_sample_parameters_deterministic_and_valid():
    g = MixedGraph(m=4, directed={(1, 2), (2, 4)}, bidirected={(1, 3), (3, 4)})
    lam1, om1 = sample_parameters(g, 42)
    lam2, om2 = sample_parameters(g, 42)
    assert np.array_equal(lam1, lam2) and np.array_equal(om1, om2)
    check_lambda_support(g, lam1)
    check_omega_support(g, om1)


def test_sample_parameters_rational_backend():
    g = MixedGraph(m=3, directed={(1, 2)}, bidirected={(2, 3)})
    lam, om = sample_parameters(g, 7, backend="rational")
    assert isinstance(lam[0, 1], Fraction)
    assert linalg.is_pd(om)


def test_matrix_json_roundtrip_rational():
    a = linalg.to_array([[Fraction(1, 3), 2], [2, Fraction(5)]], "rational")
    data = matrix_to_json(a)
    assert data["entries"][0][0] == "1/3"
    back = matrix_from_json(data, "rational")
    assert back[0, 0] == Fraction(1, 3)
    assert back[1, 1] == Fraction(5)


def test_matrix_json_roundtrip_float():
    a = np.array([[1.5, 0.25], [0.25, 2.0]])
    back = matrix_from_json(matrix_to_json(a), "float")
    assert np.array_equal(a, back)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6))
def test_phi_rational_matches_float(seed, m):
    rng = random.Random(seed)
    g = _random_dag(m, rng)
    lam, om = sample_parameters(g, seed, backend="rational")
    exact = phi(g, lam, om)
    approx = phi(g, linalg.as_float(lam), linalg.as_float(om))
    assert linalg.max_abs_diff(linalg.as_float(exact), approx) <= 1e-9 * max(
        1.0, linalg.max_abs(exact)
    )


def test_i_minus_lambda_inv_cyclic_ok():
    g = MixedGraph(m=3, directed={(1, 2), (2, 3), (3, 1)})
    lam = np.zeros((3, 3))
    lam[0, 1] = lam[1, 2] = lam[2, 0] = 0.5
    inv = i_minus_lambda_inv(g, lam)
    assert np.allclose(inv @ (np.eye(3) - lam), np.eye(3))
