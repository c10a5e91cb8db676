"""Input checking helpers shared across the package."""

import numba
import numpy as np

_FINITE_SUM_MIN_SIZE = 1_000_000


@numba.njit(cache=True)
def _finite_sum(x):
    # Plain IEEE sums with independent accumulators: any nan or inf entry
    # makes the result non-finite, and the four chains keep the loop fast.
    acc0 = 0.0
    acc1 = 0.0
    acc2 = 0.0
    acc3 = 0.0
    m = x.shape[0] - x.shape[0] % 4
    for i in range(0, m, 4):
        acc0 += x[i]
        acc1 += x[i + 1]
        acc2 += x[i + 2]
        acc3 += x[i + 3]
    for i in range(m, x.shape[0]):
        acc0 += x[i]
    return acc0 + acc1 + acc2 + acc3


def _all_finite(X):
    """True iff every entry of the float64 array X is finite.

    For large arrays a finite sum certifies finiteness (any nan or inf
    poisons it); the full scan only runs to rule out overflow of large
    finite entries when the sum comes back non-finite.
    """
    if X.size >= _FINITE_SUM_MIN_SIZE and X.flags.c_contiguous:
        if np.isfinite(_finite_sum(X.ravel())):
            return True
    return bool(np.all(np.isfinite(X)))


def check_tensor(X, k=None, n=None):
    """Coerce X to a float ndarray of shape (n,)*k and validate it.

    All axes must have equal length >= 2 and every entry must be finite.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim < 2:
        raise ValueError(f"tensor must have order >= 2, got order {X.ndim}")
    dims = set(X.shape)
    if len(dims) != 1:
        raise ValueError(f"tensor axes must all have equal length, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError(f"tensor dimension must be >= 2, got {X.shape[0]}")
    if k is not None and X.ndim != k:
        raise ValueError(f"expected order-{k} tensor, got order {X.ndim}")
    if n is not None and X.shape[0] != n:
        raise ValueError(f"expected dimension {n}, got {X.shape[0]}")
    if not _all_finite(X):
        raise ValueError("tensor contains non-finite entries")
    return X


def check_vector(v, n=None, name="v"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def check_unit(v, n=None, tol=1e-9, name="v"):
    v = check_vector(v, n=n, name=name)
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"{name} must be unit norm (got ||{name}|| = {nrm:.3e})")
    return v


def check_matrix(M, name="M"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def check_rng(rng):
    """Accept a Generator, a seed, or None (fresh entropy)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
