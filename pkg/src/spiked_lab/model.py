"""Observation-model samplers and the loss/correlation metrics.

The observation is X = beta * v0^(x)k + noise, with either exactly symmetric
Gaussian noise (entries averaged over all index permutations, scaled by
sqrt(k/n)) or plain i.i.d. Gaussian noise divided by sqrt(n).

RNG contract: all samplers take a numpy Generator (PCG64 via
numpy.random.default_rng).  Per-replicate generators are derived with
numpy SeedSequence from (master_seed, *stream keys), so results are
deterministic within this implementation and independent of scheduling.
Cross-implementation bit-exactness is not promised.
"""

import ctypes
import ctypes.util
import math
import mmap
from dataclasses import dataclass

import numba
import numpy as np

from . import tensors
from .validation import check_rng, check_unit, check_vector

__all__ = [
    "SpikedInstance",
    "SideInfo",
    "MatrixObservation",
    "derive_rng",
    "derive_seed",
    "sample_v0",
    "sample_spiked",
    "sample_side_info",
    "sample_matrix_observation",
    "correlation",
    "loss",
]

# above this many entries the k=3 symmetric noise sampler switches to the
# orbit-based kernel (identical law, one pass instead of k! transposed adds)
_FAST_PATH_ENTRIES = 2_000_000


@dataclass(frozen=True)
class SpikedInstance:
    k: int
    n: int
    beta: float
    v0: np.ndarray
    X: np.ndarray
    noise_kind: str
    seed: int | None = None


@dataclass(frozen=True)
class SideInfo:
    gamma: float
    y: np.ndarray


@dataclass(frozen=True)
class MatrixObservation:
    lam: float
    M: np.ndarray


def derive_seed(master_seed, *keys):
    """Stable 64-bit seed for one stream of a master seed."""
    ss = np.random.SeedSequence([int(master_seed), *[int(x) for x in keys]])
    return int(ss.generate_state(1, np.uint64)[0])


def derive_rng(master_seed, *keys):
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), *[int(x) for x in keys]])
    )


def sample_v0(n, rng=None):
    """Uniform draw from the unit sphere in R^n."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = check_rng(rng)
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


_MADV_HUGEPAGE = 14
try:
    _libc = ctypes.CDLL(None, use_errno=True)
    _libc.madvise.argtypes = (ctypes.c_void_p, ctypes.c_size_t, ctypes.c_int)
except (OSError, AttributeError):
    _libc = None


def _alloc_tensor(shape):
    """np.empty plus a hugepage hint for the backing pages.

    Gigabyte-scale tensors on 4 KB pages spend a lot of time in TLB misses
    during the fill and contraction sweeps; madvise(MADV_HUGEPAGE) is a
    no-op wherever unsupported, so failures are ignored.
    """
    Z = np.empty(shape)
    if _libc is not None and Z.nbytes >= 8 * 1024 * 1024:
        page = mmap.PAGESIZE
        start = -(-Z.ctypes.data // page) * page
        end = (Z.ctypes.data + Z.nbytes) // page * page
        if end > start:
            _libc.madvise(start, end - start, _MADV_HUGEPAGE)
    return Z


@numba.njit(cache=True, fastmath=True)
def _fill_symmetric3(Z, r, n, c_distinct, c_pair, c_triple, beta, u):
    # Orbit sampler for k=3: one reservoir value per sorted index triple
    # (i <= j <= l), consumed in lexicographic order; the scale depends on
    # the multiplicity pattern so each entry law matches the permutation-
    # averaged tensor.  The rank-one spike beta * u u u is folded in.
    #
    # The tensor is built one n x n slice at a time so the write working
    # set stays cache-sized: rows below the slice index are contiguous
    # copies from finished slices, the canonical wedge is written in
    # order, and the remaining lower triangle is a tiled in-slice mirror.
    # Z is caller-allocated: numpy buffers traverse markedly faster than
    # the runtime allocator's on some hosts.
    T = 64
    idx = 0
    for a in range(n):
        S = Z[a]
        ua = u[a]
        for b in range(a):
            src = Z[b, a]
            for t in range(n):
                S[b, t] = src[t]
        for b in range(a, n):
            buab = beta * ua * u[b]
            for c in range(b, n):
                g = r[idx]
                idx += 1
                if a < b < c:
                    s = c_distinct * g
                elif a == b == c:
                    s = c_triple * g
                else:
                    s = c_pair * g
                S[b, c] = s + buab * u[c]
        for bb in range(a, n, T):
            b1 = min(bb + T, n)
            for cb in range(0, b1, T):
                for b in range(max(bb, a), b1):
                    c1 = min(cb + T, b)
                    for c in range(cb, c1):
                        S[b, c] = S[c, b]
    return Z


def _symmetric_noise(k, n, rng, beta=0.0, v0=None):
    """Sample the permutation-averaged Gaussian noise tensor, scale sqrt(k/n).

    On the k=3 fast path the spike beta * v0^(x)3 is folded into the fill
    kernel; callers that go through it must not add the spike again.
    """
    if k == 3 and n**3 >= _FAST_PATH_ENTRIES:
        m = n * (n + 1) * (n + 2) // 6
        r = rng.standard_normal(m)
        scale = math.sqrt(k / n) / math.factorial(k)
        u = v0 if v0 is not None else np.zeros(n)
        Z = _alloc_tensor((n, n, n))
        _fill_symmetric3(
            Z, r, n, scale * math.sqrt(6), scale * math.sqrt(12), scale * 6.0,
            float(beta), u
        )
        return Z, True
    G = rng.standard_normal((n,) * k)
    return tensors.symmetrize(G, math.sqrt(k / n)), False


def sample_spiked(k, n, beta, rng=None, noise_kind="symmetric", seed=None):
    """Draw one spiked-tensor observation.

    If rng is None a generator is created from seed.  noise_kind "symmetric"
    averages an i.i.d. Gaussian tensor over index permutations (times
    sqrt(k/n)); "asymmetric" uses the i.i.d. tensor divided by sqrt(n).
    """
    if k < 2 or n < 2:
        raise ValueError(f"need k >= 2 and n >= 2, got k={k}, n={n}")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if noise_kind not in ("symmetric", "asymmetric"):
        raise ValueError(f"unknown noise_kind {noise_kind!r}")
    if rng is None:
        rng = np.random.default_rng(seed)
    v0 = sample_v0(n, rng)
    spike_added = False
    if noise_kind == "symmetric":
        X, spike_added = _symmetric_noise(k, n, rng, beta=beta, v0=v0)
    else:
        X = rng.standard_normal((n,) * k)
        X /= math.sqrt(n)
    if beta > 0 and not spike_added:
        spike = tensors.outer_power(v0, k)
        spike *= beta
        X += spike
    return SpikedInstance(k=k, n=n, beta=float(beta), v0=v0, X=X,
                          noise_kind=noise_kind, seed=seed)


def sample_side_info(v0, gamma, rng=None):
    """y = gamma * v0 + z with z ~ N(0, I/n)."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    v0 = check_vector(v0, name="v0")
    rng = check_rng(rng)
    n = v0.shape[0]
    y = gamma * v0 + rng.standard_normal(n) / math.sqrt(n)
    return SideInfo(gamma=float(gamma), y=y)


def sample_matrix_observation(v0, lam, rng=None):
    """M = lam * v0 v0^T + N with N symmetric, entries (diag included) N(0, 1/n)."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    v0 = check_vector(v0, name="v0")
    rng = check_rng(rng)
    n = v0.shape[0]
    A = rng.standard_normal((n, n)) / math.sqrt(n)
    N = np.triu(A) + np.triu(A, 1).T
    M = lam * np.outer(v0, v0) + N
    return MatrixObservation(lam=float(lam), M=M)


def correlation(vhat, v0):
    """|<vhat, v0>| for unit vectors; invariant under sign flips."""
    vhat = check_unit(vhat, name="vhat")
    v0 = check_unit(v0, n=vhat.shape[0], name="v0")
    return float(min(abs(np.dot(vhat, v0)), 1.0))


def loss(vhat, v0):
    """2 - 2|<vhat, v0>| = min(||vhat - v0||^2, ||vhat + v0||^2)."""
    return 2.0 - 2.0 * correlation(vhat, v0)
