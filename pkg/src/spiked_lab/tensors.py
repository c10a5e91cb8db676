"""Dense tensor algebra for order-k, dimension-n real tensors.

Tensors are plain numpy arrays of shape (n,)*k.  All operations are pure
functions and safe to call concurrently.
"""

import itertools
import math

import numba
import numpy as np

from .validation import check_rng, check_tensor, check_vector

__all__ = [
    "contract",
    "inner",
    "frobenius",
    "outer_power",
    "symmetrize",
    "is_symmetric",
    "matricize",
    "unmatricize",
    "reshape_vec_to_matrix",
    "strict_upper_embed",
    "operator_norm_estimate",
    "rayleigh",
]


def contract(X, v, symmetric=False):
    """Contract v into all but the first axis: X{v}_i = sum X[i, j1..j_{k-1}] v_j1 ... v_j{k-1}.

    For order-3 tensors that are known to be symmetric, pass symmetric=True to
    use a wedge-only kernel that reads each unordered index triple once.  The
    flag is a promise about X; it is not checked.
    """
    X = check_tensor(X)
    v = check_vector(v, n=X.shape[0])
    if symmetric and X.ndim == 3:
        return _contract_sym3(X, v)
    out = X
    for _ in range(X.ndim - 1):
        out = np.tensordot(out, v, axes=([out.ndim - 1], [0]))
    return out


@numba.njit(cache=True, fastmath=True)
def _contract_sym3(X, f):
    """X{f} for a symmetric order-3 tensor, visiting only triples i <= j <= l.

    Each triple (i, j, l) with i <= j <= l contributes to out[i], out[j] and
    out[l] with the multiplicity its permutation orbit has in the full sum.
    """
    n = X.shape[0]
    out = np.zeros(n)
    for i in range(n):
        fi = f[i]
        row = X[i, i]
        x = row[i]
        out[i] += x * fi * fi
        acc = 0.0
        for l in range(i + 1, n):
            x = row[l]
            acc += x * f[l]
            out[l] += x * fi * fi
        out[i] += 2.0 * fi * acc
        for j in range(i + 1, n):
            fj = f[j]
            row = X[i, j]
            x = row[j]
            out[i] += x * fj * fj
            out[j] += 2.0 * x * fi * fj
            c = 2.0 * fi * fj
            acc = 0.0
            for l in range(j + 1, n):
                x = row[l]
                acc += x * f[l]
                out[l] += c * x
            out[i] += 2.0 * fj * acc
            out[j] += 2.0 * fi * acc
    return out


def inner(X, Y):
    """Entrywise inner product of two tensors of identical shape."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    return float(np.dot(X.reshape(-1), Y.reshape(-1)))


def frobenius(X):
    return float(np.linalg.norm(np.asarray(X).reshape(-1)))


def rayleigh(X, v, symmetric=False):
    """<X, v^(x)k> evaluated without forming the rank-one tensor."""
    return float(np.dot(contract(X, v, symmetric=symmetric), v))


def outer_power(v, k):
    """k-th outer power v^(x)k, symmetric by construction."""
    v = check_vector(v)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    out = v
    for _ in range(k - 1):
        out = np.multiply.outer(out, v)
    return out


def symmetrize(G, scale=1.0):
    """scale * (1/k!) * sum of G over all axis permutations.

    Idempotent (at scale 1) on already-symmetric input.
    """
    G = check_tensor(G)
    k = G.ndim
    out = G.copy()
    for perm in itertools.permutations(range(k)):
        if perm == tuple(range(k)):
            continue
        out += G.transpose(perm)
    out *= scale / math.factorial(k)
    return out


def is_symmetric(X, tol=0.0):
    X = check_tensor(X)
    k = X.ndim
    for perm in itertools.permutations(range(k)):
        if not np.all(np.abs(X - X.transpose(perm)) <= tol):
            return False
    return True


def matricize(X, q):
    """Unfold X into an n^q x n^(k-q) matrix.

    Row index a = sum_j (i_j - 1) n^(j-1) over the first q tensor indices,
    column index likewise over the remaining k-q (1-based in the convention,
    0-based here); the first index varies fastest within each group, which is
    a Fortran-order reshape of the (row-major) storage.
    """
    X = check_tensor(X)
    k, n = X.ndim, X.shape[0]
    if not 1 <= q <= k - 1:
        raise ValueError(f"q must be in [1, k-1] = [1, {k - 1}], got {q}")
    return X.reshape(n**q, n ** (k - q), order="F")


def unmatricize(M, k, n, q):
    """Inverse of matricize: rebuild the order-k tensor from its q-unfolding."""
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (n**q, n ** (k - q)):
        raise ValueError(f"expected shape {(n**q, n**(k-q))}, got {M.shape}")
    return M.reshape((n,) * k, order="F")


def reshape_vec_to_matrix(w, rows):
    """Matrix with entry (i, j) = w[i + (j-1) * rows] (1-based), i.e. column-major fill."""
    w = check_vector(w, name="w")
    if w.shape[0] % rows != 0:
        raise ValueError(f"length {w.shape[0]} not divisible by rows={rows}")
    return w.reshape(rows, -1, order="F")


def strict_upper_embed(X):
    """Entries X[i1 < i2 < ... < ik] in lexicographic order; length C(n, k)."""
    X = check_tensor(X)
    k, n = X.ndim, X.shape[0]
    if k > n:
        return np.empty(0)
    idx = np.array(list(itertools.combinations(range(n), k)))
    return X[tuple(idx.T)]


def operator_norm_estimate(X, restarts=30, iters=50, rng=None, tol=1e-10):
    """Lower-bound estimate of ||X||_op for symmetric X.

    Multi-restart power iteration v <- X{v}/||X{v}||, keeping the visited
    point with largest |<X, v^(x)k>|.  Returns (value, argmax).
    """
    X = check_tensor(X)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = check_rng(rng)
    n = X.shape[0]
    best_val, best_v = -1.0, None
    for _ in range(restarts):
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        for _ in range(iters):
            w = contract(X, v)
            nrm = np.linalg.norm(w)
            if nrm == 0.0:
                break
            w /= nrm
            val = abs(np.dot(contract(X, w), w))
            if val > best_val:
                best_val, best_v = val, w
            if abs(np.dot(w, v)) >= 1.0 - tol:
                v = w
                break
            v = w
        val = abs(np.dot(contract(X, v), v))
        if val > best_val:
            best_val, best_v = val, v
    return best_val, best_v
