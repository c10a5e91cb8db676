"""Estimation algorithms for the rank-one spiked tensor model.

Two layers:

* plain functions (``unfold_estimate``, ``recursive_unfold``, ``power_iteration``,
  ``amp``, ``psd_constrained_pca``, ``warm_start``, ``ml_bruteforce``) returning
  an :class:`EstimatorResult`;
* sklearn-style estimator classes wrapping them (``fit(X, v0=None)`` sets
  ``v_`` and ``result_``), so the algorithms compose with pipelines and
  parameter search in the wider ecosystem.

Every returned vector is unit norm with its largest-magnitude entry positive;
correlation against the truth is reported as an absolute value.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import linalg, model, tensors
from .validation import check_rng, check_tensor, check_vector

__all__ = [
    "EstimatorResult",
    "unfold_estimate",
    "recursive_unfold",
    "power_iteration",
    "amp",
    "psd_constrained_pca",
    "warm_start",
    "ml_bruteforce",
    "Unfolding",
    "RecursiveUnfolding",
    "TensorPowerIteration",
    "TensorAMP",
    "PSDConstrainedPCA",
    "WarmStartPower",
    "MLBruteForce",
]

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-8


@dataclass
class EstimatorResult:
    vhat: np.ndarray
    iterations: int
    rayleigh: float
    converged: bool
    correlation: float | None = None
    loss: float | None = None
    trajectory: list[float] | None = field(default=None, repr=False)


def _canonical(v):
    v = v / np.linalg.norm(v)
    j = int(np.argmax(np.abs(v)))
    return -v if v[j] < 0 else v


def _finish(X, vhat, iterations, converged, v0=None, trajectory=None,
            symmetric=False):
    vhat = _canonical(vhat)
    res = EstimatorResult(
        vhat=vhat,
        iterations=iterations,
        # |<X, vhat^(x)k>|: the estimate is defined up to sign, so report
        # the sign-invariant value (a lower bound on ||X||_op)
        rayleigh=abs(tensors.rayleigh(X, vhat, symmetric=symmetric)),
        converged=converged,
        trajectory=trajectory,
    )
    if v0 is not None:
        res.correlation = model.correlation(vhat, v0)
        res.loss = 2.0 - 2.0 * res.correlation
    return res


def unfold_estimate(X, tol=1e-10, max_iter=1000, rng=None):
    """Top singular pair of the most balanced unfolding.

    Rows are the first floor(k/2) indices, so for the noiseless rank-one
    tensor the factorization reads beta * vec(v0^(x)floor(k/2)) *
    vec(v0^(x)ceil(k/2))^T.  Returns (w, u, triple): the right and left unit
    singular vectors and the full SingularTriple.
    """
    X = check_tensor(X)
    k = X.ndim
    if k < 3:
        raise ValueError(f"unfolding needs k >= 3, got k={k}")
    M = tensors.matricize(X, k // 2)
    tri = linalg.top_singular(M, tol=tol, max_iter=max_iter, rng=rng)
    return tri.w, tri.u, tri


def recursive_unfold(X, v0=None, tol=1e-10, max_iter=1000, rng=None):
    """Unfold, then re-matricize the right singular vector (n rows) and take
    the left principal vector as the estimate of the planted direction."""
    X = check_tensor(X)
    n = X.shape[0]
    w, _, tri1 = unfold_estimate(X, tol=tol, max_iter=max_iter, rng=rng)
    B = tensors.reshape_vec_to_matrix(w, n)
    tri2 = linalg.top_singular(B, tol=tol, max_iter=max_iter, rng=rng)
    return _finish(X, tri2.u, tri1.iters + tri2.iters,
                   tri1.converged and tri2.converged, v0=v0)


def power_iteration(X, v_init, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                    v0=None, symmetric=False):
    """v <- X{v} / ||X{v}|| until successive correlation >= 1 - tol.

    symmetric=True promises that X is symmetric (k=3 only), enabling the
    wedge-only contraction kernel.
    """
    X = check_tensor(X)
    v = check_vector(v_init, n=X.shape[0], name="v_init")
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("v_init must be nonzero")
    v = v / nrm
    traj = [] if v0 is not None else None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = tensors.contract(X, v, symmetric=symmetric)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return _finish(X, v, it, False, v0=v0, trajectory=traj,
                           symmetric=symmetric)
        w /= nrm
        if traj is not None:
            traj.append(abs(float(np.dot(w, v0))))
        done = abs(np.dot(w, v)) >= 1.0 - tol
        v = w
        if done:
            converged = True
            break
    return _finish(X, v, it, converged, v0=v0, trajectory=traj,
                   symmetric=symmetric)


def amp(X, y, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL, v0=None,
        symmetric=False):
    """Power-like iteration with a memory correction term.

    v^{t+1} = X{f(v^t)} - b_t f(v^{t-1}), f(x) = x/||x||,
    b_t = (k-1) <f(v^t), f(v^{t-1})>^{k-2} / ||v^t||, started from v^0 = y
    with f(v^{-1}) = 0 so the first memory term vanishes.  The 1/||v^t||
    factor is the trace of the Jacobian of f; with it the iteration tracks
    the deterministic overlap recursion (checked in the acceptance suite).
    """
    X = check_tensor(X)
    k, n = X.ndim, X.shape[0]
    y = check_vector(y, n=n, name="y")
    if np.linalg.norm(y) == 0.0:
        raise ValueError("y must be nonzero")
    f_prev = np.zeros(n)
    v = y
    traj = [] if v0 is not None else None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        v_norm = np.linalg.norm(v)
        f_cur = v / v_norm
        if traj is not None:
            traj.append(abs(float(np.dot(f_cur, v0))))
        b = (k - 1) * float(np.dot(f_cur, f_prev)) ** (k - 2) / v_norm
        v_next = tensors.contract(X, f_cur, symmetric=symmetric) - b * f_prev
        nrm = np.linalg.norm(v_next)
        if nrm == 0.0:
            return _finish(X, f_cur, it, False, v0=v0, trajectory=traj,
                           symmetric=symmetric)
        if abs(np.dot(v_next / nrm, f_cur)) >= 1.0 - tol:
            converged = True
            f_prev, v = f_cur, v_next
            break
        f_prev, v = f_cur, v_next
    return _finish(X, v, it, converged, v0=v0, trajectory=traj,
                   symmetric=symmetric)


def psd_constrained_pca(X, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                        rng=None, v0=None):
    """Projected power iteration for k=3 with the left factor constrained to
    reshape to a PSD matrix: w^t = P_psd(Mat(X) v^t), v^{t+1} normalized
    Mat(X)^T w^t.  w^t is deliberately not normalized."""
    X = check_tensor(X)
    if X.ndim != 3:
        raise ValueError(f"psd_constrained_pca supports k=3 only, got k={X.ndim}")
    n = X.shape[0]
    rng = check_rng(rng)
    M = tensors.matricize(X, 2)  # n^2 x n, rows indexed by (i1, i2)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = linalg.psd_project(M @ v, n)
        if not np.any(w):
            return _finish(X, v, it, False, v0=v0)
        v_next = M.T @ w
        nrm = np.linalg.norm(v_next)
        if nrm == 0.0:
            return _finish(X, v, it, False, v0=v0)
        v_next /= nrm
        done = abs(np.dot(v_next, v)) >= 1.0 - tol
        v = v_next
        if done:
            converged = True
            break
    return _finish(X, v, it, converged, v0=v0)


INITIALIZERS = ("random", "unfold", "rec_unfold", "psd")
ITERATORS = ("power", "amp")


def _initial_vector(X, initializer, tol, max_iter, rng):
    """Starting point and the iteration count spent obtaining it."""
    k, n = X.ndim, X.shape[0]
    if initializer == "random":
        v = rng.standard_normal(n)
        return v / np.linalg.norm(v), 0
    if initializer == "unfold":
        w, u, tri = unfold_estimate(X, rng=rng)
        if u.shape[0] == n:
            return u, tri.iters
        # left factor lives in a higher power space; extract v recursively
        res = recursive_unfold(X, rng=rng)
        return res.vhat, res.iterations
    if initializer == "rec_unfold":
        res = recursive_unfold(X, rng=rng)
        return res.vhat, res.iterations
    if initializer == "psd":
        res = psd_constrained_pca(X, max_iter=max_iter, tol=tol, rng=rng)
        return res.vhat, res.iterations
    raise ValueError(f"unknown initializer {initializer!r}")


def warm_start(X, initializer="rec_unfold", iterator="power",
               max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL, rng=None, v0=None):
    """Run an unfolding-type initializer, then an iterative refiner."""
    X = check_tensor(X)
    if initializer not in INITIALIZERS:
        raise ValueError(f"unknown initializer {initializer!r}")
    if iterator not in ITERATORS:
        raise ValueError(f"unknown iterator {iterator!r}")
    if initializer == "psd" and X.ndim != 3:
        raise ValueError("psd initializer requires k=3")
    rng = check_rng(rng)
    v_start, init_iters = _initial_vector(X, initializer, tol, max_iter, rng)
    if iterator == "power":
        res = power_iteration(X, v_start, max_iter=max_iter, tol=tol, v0=v0)
    else:
        res = amp(X, v_start, max_iter=max_iter, tol=tol, v0=v0)
    res.iterations += init_iters
    return res


def ml_bruteforce(X, restarts=30, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                  rng=None, v0=None):
    """Multi-restart power iteration keeping the largest |<X, v^(x)k>|.

    A heuristic stand-in for the (NP-hard) maximum-likelihood problem; the
    rayleigh field is a lower bound on the tensor operator norm.
    """
    X = check_tensor(X)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = check_rng(rng)
    n = X.shape[0]
    best = None
    best_val = -1.0
    total_iters = 0
    for _ in range(restarts):
        v = rng.standard_normal(n)
        res = power_iteration(X, v, max_iter=max_iter, tol=tol, v0=v0)
        total_iters += res.iterations
        if abs(res.rayleigh) > best_val:
            best_val = abs(res.rayleigh)
            best = res
    best.iterations = total_iters
    return best


# ---------------------------------------------------------------------------
# sklearn-style wrappers


class _SpikedTensorEstimator(BaseEstimator):
    """Base class: fit(X, v0=None) stores v_ (the unit estimate) and result_."""

    def fit(self, X, v0=None):
        self.result_ = self._run(check_tensor(X), v0)
        self.v_ = self.result_.vhat
        self.n_iter_ = self.result_.iterations
        return self

    def fit_estimate(self, X, v0=None):
        return self.fit(X, v0=v0).v_

    def score(self, X, v0):
        """Absolute correlation with the planted direction."""
        if not hasattr(self, "v_"):
            self.fit(X, v0=v0)
        return model.correlation(self.v_, v0)


class Unfolding(_SpikedTensorEstimator):
    """One-shot unfolding; the estimate is the left singular factor (k=3)."""

    def __init__(self, tol=1e-10, max_iter=1000, random_state=None):
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def _run(self, X, v0):
        if X.ndim != 3:
            raise ValueError("Unfolding yields an n-vector only for k=3; "
                             "use RecursiveUnfolding for higher orders")
        w, u, tri = unfold_estimate(X, tol=self.tol, max_iter=self.max_iter,
                                    rng=check_rng(self.random_state))
        self.w_ = w
        res = _finish(X, u, tri.iters, tri.converged, v0=v0)
        return res


class RecursiveUnfolding(_SpikedTensorEstimator):
    def __init__(self, tol=1e-10, max_iter=1000, random_state=None):
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def _run(self, X, v0):
        return recursive_unfold(X, v0=v0, tol=self.tol, max_iter=self.max_iter,
                                rng=check_rng(self.random_state))


class TensorPowerIteration(_SpikedTensorEstimator):
    def __init__(self, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                 random_state=None):
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _run(self, X, v0):
        rng = check_rng(self.random_state)
        v_init = rng.standard_normal(X.shape[0])
        return power_iteration(X, v_init, max_iter=self.max_iter, tol=self.tol,
                               v0=v0)


class TensorAMP(_SpikedTensorEstimator):
    """AMP started from side information y (random unit vector if None)."""

    def __init__(self, y=None, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                 random_state=None):
        self.y = y
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _run(self, X, v0):
        y = self.y
        if y is None:
            y = check_rng(self.random_state).standard_normal(X.shape[0])
        return amp(X, y, max_iter=self.max_iter, tol=self.tol, v0=v0)


class PSDConstrainedPCA(_SpikedTensorEstimator):
    def __init__(self, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                 random_state=None):
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _run(self, X, v0):
        return psd_constrained_pca(X, max_iter=self.max_iter, tol=self.tol,
                                   rng=check_rng(self.random_state), v0=v0)


class WarmStartPower(_SpikedTensorEstimator):
    def __init__(self, initializer="rec_unfold", iterator="power",
                 max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL, random_state=None):
        self.initializer = initializer
        self.iterator = iterator
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _run(self, X, v0):
        return warm_start(X, initializer=self.initializer, iterator=self.iterator,
                          max_iter=self.max_iter, tol=self.tol,
                          rng=check_rng(self.random_state), v0=v0)


class MLBruteForce(_SpikedTensorEstimator):
    def __init__(self, restarts=30, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
                 random_state=None):
        self.restarts = restarts
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _run(self, X, v0):
        return ml_bruteforce(X, restarts=self.restarts, max_iter=self.max_iter,
                             tol=self.tol, rng=check_rng(self.random_state), v0=v0)
