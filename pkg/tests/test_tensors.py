import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiked_lab import tensors


def random_unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def test_contract_matches_einsum():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((4, 4, 4))
    v = rng.standard_normal(4)
    got = tensors.contract(X, v)
    want = np.einsum("ijk,j,k->i", X, v, v)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_contract_order_four():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((3, 3, 3, 3))
    v = rng.standard_normal(3)
    want = np.einsum("ijkl,j,k,l->i", X, v, v, v)
    np.testing.assert_allclose(tensors.contract(X, v), want, atol=1e-12)


def test_rayleigh_equals_inner_with_outer_power():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((5, 5, 5))
    v = random_unit(rng, 5)
    want = tensors.inner(X, tensors.outer_power(v, 3))
    assert tensors.rayleigh(X, v) == pytest.approx(want, abs=1e-12)


def test_rayleigh_of_pure_spike():
    rng = np.random.default_rng(3)
    v = random_unit(rng, 6)
    X = 2.5 * tensors.outer_power(v, 3)
    assert tensors.rayleigh(X, v) == pytest.approx(2.5, abs=1e-12)


def test_outer_power_entries():
    v = np.array([1.0, 2.0, -1.0])
    X = tensors.outer_power(v, 3)
    for i, j, k in itertools.product(range(3), repeat=3):
        assert X[i, j, k] == v[i] * v[j] * v[k]


def test_frobenius_matches_numpy():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((4, 4, 4))
    assert tensors.frobenius(X) == pytest.approx(np.linalg.norm(X.ravel()))


def test_symmetrize_produces_symmetric_tensor():
    rng = np.random.default_rng(5)
    G = rng.standard_normal((4, 4, 4))
    S = tensors.symmetrize(G)
    assert tensors.is_symmetric(S, tol=1e-12)


def test_symmetrize_idempotent():
    rng = np.random.default_rng(6)
    S = tensors.symmetrize(rng.standard_normal((3, 3, 3)))
    np.testing.assert_allclose(tensors.symmetrize(S), S, atol=1e-12)


def test_symmetrize_entry_oracle():
    # direct average over the 6 permutations of one index triple
    rng = np.random.default_rng(7)
    G = rng.standard_normal((5, 5, 5))
    S = tensors.symmetrize(G)
    i, j, l = 0, 2, 4
    want = np.mean([G[p] for p in itertools.permutations((i, j, l))])
    assert S[i, j, l] == pytest.approx(want, abs=1e-12)


def test_symmetrize_scale():
    rng = np.random.default_rng(8)
    G = rng.standard_normal((3, 3, 3))
    np.testing.assert_allclose(tensors.symmetrize(G, scale=3.0),
                               3.0 * tensors.symmetrize(G), atol=1e-12)


def test_matricize_index_formula():
    # M[a, b] = X[i1, i2, i3] with a = i1, b = i2 + i3 * n for q = 1;
    # the first index of each group varies fastest
    n = 3
    X = np.arange(n**3, dtype=float).reshape((n, n, n))
    M1 = tensors.matricize(X, 1)
    M2 = tensors.matricize(X, 2)
    for i1, i2, i3 in itertools.product(range(n), repeat=3):
        assert M1[i1, i2 + i3 * n] == X[i1, i2, i3]
        assert M2[i1 + i2 * n, i3] == X[i1, i2, i3]


def test_matricize_shapes_and_q_bounds():
    X = np.zeros((2, 2, 2, 2))
    assert tensors.matricize(X, 1).shape == (2, 8)
    assert tensors.matricize(X, 2).shape == (4, 4)
    assert tensors.matricize(X, 3).shape == (8, 2)
    with pytest.raises(ValueError):
        tensors.matricize(X, 0)
    with pytest.raises(ValueError):
        tensors.matricize(X, 4)


def test_matricize_of_outer_power_is_rank_one():
    rng = np.random.default_rng(9)
    v = random_unit(rng, 4)
    M = tensors.matricize(tensors.outer_power(v, 4), 2)
    w2 = tensors.matricize(tensors.outer_power(v, 2), 1).reshape(-1, order="F")
    np.testing.assert_allclose(M, np.outer(w2, w2), atol=1e-12)


def test_unmatricize_round_trip():
    rng = np.random.default_rng(10)
    X = rng.standard_normal((3, 3, 3, 3))
    for q in (1, 2, 3):
        M = tensors.matricize(X, q)
        np.testing.assert_allclose(tensors.unmatricize(M, 4, 3, q), X,
                                   atol=1e-15)


def test_reshape_vec_to_matrix_entry_formula():
    w = np.arange(12, dtype=float)
    B = tensors.reshape_vec_to_matrix(w, 3)
    assert B.shape == (3, 4)
    for i in range(3):
        for j in range(4):
            assert B[i, j] == w[i + j * 3]


def test_reshape_vec_to_matrix_rejects_bad_length():
    with pytest.raises(ValueError):
        tensors.reshape_vec_to_matrix(np.arange(10, dtype=float), 3)


def test_strict_upper_embed_length_and_values():
    rng = np.random.default_rng(11)
    n = 6
    X = rng.standard_normal((n, n, n))
    u = tensors.strict_upper_embed(X)
    assert u.shape == (math.comb(n, 3),)
    manual = [X[i, j, k]
              for i in range(n) for j in range(i + 1, n)
              for k in range(j + 1, n)]
    np.testing.assert_allclose(u, manual, atol=0)


def test_operator_norm_estimate_on_pure_spike():
    rng = np.random.default_rng(12)
    v = random_unit(rng, 8)
    X = 4.0 * tensors.outer_power(v, 3)
    val, arg = tensors.operator_norm_estimate(X, restarts=10, rng=rng)
    assert val == pytest.approx(4.0, rel=1e-6)
    assert abs(np.dot(arg, v)) == pytest.approx(1.0, abs=1e-6)


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 10_000), st.integers(1, 2))
def test_matricize_preserves_frobenius(seed, q):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3, 3, 3))
    M = tensors.matricize(X, q)
    assert np.linalg.norm(M) == pytest.approx(tensors.frobenius(X))


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 10_000))
def test_contract_is_linear_in_tensor(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3, 3, 3))
    Y = rng.standard_normal((3, 3, 3))
    v = rng.standard_normal(3)
    lhs = tensors.contract(X + 2.0 * Y, v)
    rhs = tensors.contract(X, v) + 2.0 * tensors.contract(Y, v)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_check_tensor_rejects_ragged_and_nonfinite():
    with pytest.raises(ValueError):
        tensors.contract(np.zeros((3, 4, 3)), np.zeros(3))
    bad = np.zeros((2, 2, 2))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        tensors.contract(bad, np.zeros(2))
