import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiked_lab import linalg, tensors


def test_top_singular_matches_dense_svd():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((8, 5))
    tri = linalg.top_singular(M, rng=rng)
    s_true = np.linalg.svd(M, compute_uv=False)[0]
    assert tri.sigma == pytest.approx(s_true, rel=1e-9)
    assert tri.converged


def test_top_singular_vectors_satisfy_defining_relations():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((6, 9))
    tri = linalg.top_singular(M, rng=rng)
    assert np.linalg.norm(tri.u) == pytest.approx(1.0, abs=1e-9)
    assert np.linalg.norm(tri.w) == pytest.approx(1.0, abs=1e-9)
    # iteration stops on the Gram-side overlap, so residuals sit near
    # sqrt(tol), not tol
    np.testing.assert_allclose(M @ tri.w, tri.sigma * tri.u, atol=1e-4)
    np.testing.assert_allclose(M.T @ tri.u, tri.sigma * tri.w, atol=1e-4)


def test_top_singular_sign_convention():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((7, 7))
    tri = linalg.top_singular(M, rng=rng)
    j = int(np.argmax(np.abs(tri.w)))
    assert tri.w[j] > 0
    # flipping the matrix sign must not change the singular pair up to the
    # fixed convention
    tri2 = linalg.top_singular(-M, rng=np.random.default_rng(2))
    assert tri2.sigma == pytest.approx(tri.sigma, rel=1e-9)
    np.testing.assert_allclose(np.abs(tri2.w), np.abs(tri.w), atol=1e-4)


def test_top_singular_rank_one_exact():
    rng = np.random.default_rng(3)
    u = rng.standard_normal(5)
    u /= np.linalg.norm(u)
    w = rng.standard_normal(7)
    w /= np.linalg.norm(w)
    tri = linalg.top_singular(3.0 * np.outer(u, w), rng=rng)
    assert tri.sigma == pytest.approx(3.0, rel=1e-10)
    assert abs(np.dot(tri.u, u)) == pytest.approx(1.0, abs=1e-9)
    assert abs(np.dot(tri.w, w)) == pytest.approx(1.0, abs=1e-9)


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 10_000))
def test_top_singular_dominant_value_property(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((4, 6))
    tri = linalg.top_singular(M, rng=rng)
    s_true = np.linalg.svd(M, compute_uv=False)[0]
    assert tri.sigma <= s_true * (1 + 1e-9)
    assert tri.sigma >= 0.0


def test_sym_eigen_matches_numpy_descending():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((6, 6))
    A = (A + A.T) / 2
    vals, vecs = linalg.sym_eigen(A)
    ref = np.sort(np.linalg.eigvalsh(A))[::-1]
    np.testing.assert_allclose(vals, ref, atol=1e-10)
    np.testing.assert_allclose(A @ vecs, vecs * vals, atol=1e-9)


def test_sym_eigen_rejects_asymmetric():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        linalg.sym_eigen(A)


def test_psd_project_output_is_psd():
    rng = np.random.default_rng(5)
    n = 6
    w = rng.standard_normal(n * n)
    p = linalg.psd_project(w, n)
    B = tensors.reshape_vec_to_matrix(p, n)
    np.testing.assert_allclose(B, B.T, atol=1e-10)
    assert np.linalg.eigvalsh(B).min() >= -1e-10


def test_psd_project_fixes_psd_input():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((5, 5))
    P = A @ A.T
    w = P.reshape(-1, order="F")
    np.testing.assert_allclose(linalg.psd_project(w, 5), w, atol=1e-9)


def test_psd_project_is_nearest_psd_for_symmetric_input():
    # oracle: eigenvalue clipping of the symmetric matrix
    rng = np.random.default_rng(7)
    A = rng.standard_normal((4, 4))
    S = (A + A.T) / 2
    vals, vecs = np.linalg.eigh(S)
    want = (vecs * np.clip(vals, 0, None)) @ vecs.T
    got = tensors.reshape_vec_to_matrix(
        linalg.psd_project(S.reshape(-1, order="F"), 4), 4)
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_top_singular_respects_max_iter():
    rng = np.random.default_rng(8)
    M = rng.standard_normal((20, 20))
    tri = linalg.top_singular(M, tol=0.0, max_iter=3, rng=rng)
    assert tri.iters <= 3
    assert not tri.converged
