"""Minimal dense linear algebra: top singular pair, symmetric
eigendecomposition, PSD-cone projection."""

from dataclasses import dataclass

import numpy as np

from .tensors import reshape_vec_to_matrix
from .validation import check_matrix, check_rng, check_vector

__all__ = ["SingularTriple", "top_singular", "sym_eigen", "psd_project"]


@dataclass(frozen=True)
class SingularTriple:
    sigma: float
    u: np.ndarray
    w: np.ndarray
    iters: int
    converged: bool


def _fix_sign(u, w):
    # convention: the largest-magnitude entry of w is positive; flip both
    # factors together so sigma * u w^T is unchanged
    j = int(np.argmax(np.abs(w)))
    if w[j] < 0:
        return -u, -w
    return u, w


def top_singular(M, tol=1e-10, max_iter=1000, rng=None):
    """Dominant singular triple of M by power iteration on the Gram operator.

    The iteration runs on the smaller Gram side (min(r, c) x min(r, c)), so
    an n^q x n^(k-q) unfolding never forms its larger Gram matrix.
    Convergence: successive iterate correlation >= 1 - tol.  On
    non-convergence the best iterate is returned with converged=False.
    """
    M = check_matrix(M)
    r, c = M.shape
    if not np.any(M):
        raise ValueError("top_singular undefined for the zero matrix")
    rng = check_rng(rng)
    if r <= c:
        B = M @ M.T
    else:
        B = M.T @ M
    m = B.shape[0]
    x = rng.standard_normal(m)
    x /= np.linalg.norm(x)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        y = B @ x
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            # iterate landed in the null space; restart from fresh noise
            y = rng.standard_normal(m)
            nrm = np.linalg.norm(y)
        y /= nrm
        done = abs(np.dot(y, x)) >= 1.0 - tol
        x = y
        if done:
            converged = True
            break
    if r <= c:
        u = x
        w = M.T @ u
        sigma = np.linalg.norm(w)
        w = w / sigma if sigma > 0 else w
    else:
        w = x
        u = M @ w
        sigma = np.linalg.norm(u)
        u = u / sigma if sigma > 0 else u
    u, w = _fix_sign(u, w)
    return SingularTriple(sigma=float(sigma), u=u, w=w, iters=it, converged=converged)


def sym_eigen(A, sym_tol=1e-10):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Returns (eigenvalues, eigenvectors) with eigenvectors as columns.
    """
    A = check_matrix(A, name="A")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.max(np.abs(A - A.T)) > sym_tol * scale:
        raise ValueError("A is not symmetric within tolerance")
    vals, vecs = np.linalg.eigh((A + A.T) / 2.0)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def psd_project(w, n):
    """Orthogonal projection of vec(A) onto the PSD cone.

    Reshapes w to n x n column-major, takes the symmetric part, clips
    negative eigenvalues, and flattens back with the same layout.  This is
    the Frobenius-nearest PSD point of the symmetric part.
    """
    w = check_vector(w, name="w")
    if w.shape[0] != n * n:
        raise ValueError(f"w must have length n^2 = {n * n}, got {w.shape[0]}")
    A = reshape_vec_to_matrix(w, n)
    S = (A + A.T) / 2.0
    vals, vecs = np.linalg.eigh(S)
    vals = np.clip(vals, 0.0, None)
    P = (vecs * vals) @ vecs.T
    return P.reshape(-1, order="F")
