"""Closed-form constants, bounds, and the deterministic overlap recursion.

Everything here is a pure scalar computation: the oracle layer that tests
and experiments compare Monte-Carlo measurements against.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import tensors
from .validation import check_unit

__all__ = [
    "SETrajectory",
    "FixedPoints",
    "g_k",
    "eta_k",
    "mu_k",
    "sudakov_fernique_upper",
    "wedin_loss_bound",
    "matricized_norm_bounds",
    "state_evolution",
    "omega_k",
    "fixed_points",
    "gamma_star",
    "amp_limit_correlation",
    "kl_divergence_exact",
    "kl_bound",
    "it_lower_bound_beta",
    "pi_conditions",
    "matrix_pca_correlation",
]

BISECT_TOL = 1e-12


def _bisect(f, lo, hi, tol=BISECT_TOL, max_iter=200):
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"no sign change on bracket [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0 or (hi - lo) < tol:
            return mid
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo, hi, tol=1e-8, max_iter=200):
    """Golden-section maximization of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


# ---------------------------------------------------------------------------
# landscape complexity and the asymptotic noise operator norm


def eta_k(k):
    """Left edge of the local-maxima band, 2 sqrt(k-1)."""
    return 2.0 * math.sqrt(k - 1)


def g_k(x, k):
    """Exponential growth rate of the expected number of local maxima of the
    noise landscape at level x; constant at its value at eta_k below it."""
    if k < 3:
        raise ValueError(f"g_k needs k >= 3, got {k}")
    eta = eta_k(k)
    x = max(float(x), eta)
    z = (x - math.sqrt(max(x * x - 4.0 * (k - 1), 0.0))) / ((k - 1) * math.sqrt(2.0 * k))
    return 0.5 * (
        (2.0 - k) / k
        - math.log(k * z * z / 2.0)
        + (k - 1) / 2.0 * z * z
        - 2.0 / (k * k * z * z)
    )


def mu_k(k, tol=BISECT_TOL):
    """Asymptotic operator norm of the symmetric noise tensor: the unique
    root of g_k above eta_k."""
    if k < 3:
        raise ValueError(f"mu_k needs k >= 3, got {k}")
    eta = eta_k(k)
    hi = eta + 10.0 * math.sqrt(k)
    if g_k(hi, k) > 0:
        raise ValueError(f"bracket failure for mu_k at k={k}")
    return _bisect(lambda x: g_k(x, k), eta, hi, tol=tol)


def sudakov_fernique_upper(beta, k):
    """Upper bound on E||X||_op: max over tau >= 0 of
    beta (tau/sqrt(1+tau^2))^k + k/sqrt(1+tau^2)."""
    if beta < 0 or k < 2:
        raise ValueError("need beta >= 0 and k >= 2")

    def f(tau):
        s = 1.0 / math.sqrt(1.0 + tau * tau)
        return beta * (tau * s) ** k + k * s

    # coarse geometric grid to bracket, then golden-section refinement
    grid = np.concatenate(([0.0], np.geomspace(1e-6, 1e8, 300)))
    vals = [f(t) for t in grid]
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    _, best = _golden_max(f, lo, hi, tol=1e-8)
    return max(best, float(beta), float(k))


def wedin_loss_bound(beta, xi):
    """Singular-vector loss bound 8 xi^2 / beta^2, valid for beta > 2 xi."""
    if xi < 0:
        raise ValueError("xi must be >= 0")
    if beta <= 2.0 * xi:
        raise ValueError(f"bound requires beta > 2*xi (beta={beta}, xi={xi})")
    return 8.0 * xi * xi / (beta * beta)


def matricized_norm_bounds(k, n, q):
    """(lower, upper) for the expected operator norm of the q-unfolded noise.

    upper = sqrt(k) (n^((q-1)/2) + n^((k-q-1)/2));
    lower = n^(max(q-1, k-q-1)/2) / sqrt((k-1)!), leading term only.
    """
    if not 1 <= q <= k - 1:
        raise ValueError(f"q must be in [1, {k - 1}], got {q}")
    upper = math.sqrt(k) * (n ** ((q - 1) / 2.0) + n ** ((k - q - 1) / 2.0))
    lower = n ** (max(q - 1, k - q - 1) / 2.0) / math.sqrt(math.factorial(k - 1))
    return lower, upper


# ---------------------------------------------------------------------------
# overlap recursion and its fixed points


@dataclass(frozen=True)
class SETrajectory:
    k: int
    beta: float
    tau0: float
    taus: list[float]
    fixed_point: float | None
    converged_to: str  # "zero" | "upper"


@dataclass(frozen=True)
class FixedPoints:
    k: int
    beta: float
    x_star: float
    omega: float
    x_lo: float | None
    x_hi: float | None

    @property
    def exists(self):
        return self.x_lo is not None


def state_evolution(beta, k, tau0, steps):
    """Deterministic overlap recursion tau_{t+1}^2 = beta^2 (tau_t^2/(1+tau_t^2))^(k-1)."""
    if tau0 < 0 or steps < 1:
        raise ValueError("need tau0 >= 0 and steps >= 1")
    taus = [float(tau0)]
    fixed = None
    for _ in range(steps):
        t2 = taus[-1] ** 2
        nxt = beta * (t2 / (1.0 + t2)) ** ((k - 1) / 2.0)
        taus.append(nxt)
        if fixed is None and abs(nxt - taus[-2]) < 1e-12:
            fixed = nxt
    converged_to = "zero" if taus[-1] < 1e-8 else "upper"
    return SETrajectory(k=k, beta=float(beta), tau0=float(tau0), taus=taus,
                        fixed_point=fixed, converged_to=converged_to)


def omega_k(k):
    """Smallest beta with a nonzero overlap fixed point:
    sqrt((k-1)^(k-1) / (k-2)^(k-2))."""
    if k < 3:
        raise ValueError(f"omega_k needs k >= 3, got {k}")
    return math.sqrt((k - 1) ** (k - 1) / (k - 2) ** (k - 2))


def fixed_points(beta, k, tol=BISECT_TOL):
    """Roots of x^(k-2) (1-x) = 1/beta^2 in (0,1), parametrizing the nonzero
    fixed points via x = tau^2/(1+tau^2).  Both roots absent for beta below
    omega_k; coincident at x_* = (k-2)/(k-1) at the tangency point."""
    if k < 3:
        raise ValueError(f"fixed_points needs k >= 3, got {k}")
    omega = omega_k(k)
    x_star = (k - 2) / (k - 1)
    if beta < omega - 1e-9:
        return FixedPoints(k=k, beta=float(beta), x_star=x_star, omega=omega,
                           x_lo=None, x_hi=None)
    if abs(beta - omega) <= 1e-9:
        return FixedPoints(k=k, beta=float(beta), x_star=x_star, omega=omega,
                           x_lo=x_star, x_hi=x_star)
    target = 1.0 / (beta * beta)
    eps = 1e-14

    def h(x):
        return x ** (k - 2) * (1.0 - x) - target

    x_lo = _bisect(h, eps, x_star, tol=tol)
    x_hi = _bisect(h, x_star, 1.0 - eps, tol=tol)
    return FixedPoints(k=k, beta=float(beta), x_star=x_star, omega=omega,
                       x_lo=x_lo, x_hi=x_hi)


def gamma_star(beta, k):
    """Minimal initial overlap for the recursion to escape to the upper fixed
    point: sqrt(x_lo / (1 - x_lo))."""
    fp = fixed_points(beta, k)
    if not fp.exists:
        raise ValueError(
            f"no nonzero fixed point: beta={beta} <= omega_{k}={fp.omega:.6g}")
    return math.sqrt(fp.x_lo / (1.0 - fp.x_lo))


def amp_limit_correlation(beta, k, gamma, max_steps=100000):
    """Limiting overlap tau_inf/sqrt(1+tau_inf^2) of the recursion started at gamma."""
    traj = state_evolution(beta, k, gamma, 1)
    tau = traj.taus[-1]
    for _ in range(max_steps):
        t2 = tau * tau
        nxt = beta * (t2 / (1.0 + t2)) ** ((k - 1) / 2.0)
        if abs(nxt - tau) < 1e-14:
            tau = nxt
            break
        tau = nxt
    return tau / math.sqrt(1.0 + tau * tau)


# ---------------------------------------------------------------------------
# information-theoretic quantities and algorithm certificates


def kl_divergence_exact(w, wp, beta, n, k):
    """Exact divergence between the strictly-increasing-index observations
    conditioned on the two spikes: n (k-1)! beta^2 ||U(w^k) - U(wp^k)||^2."""
    w = check_unit(w, n=n, name="w")
    wp = check_unit(wp, n=n, name="wp")
    if k > n:
        raise ValueError(f"exact divergence needs k <= n, got k={k}, n={n}")
    uw = tensors.strict_upper_embed(tensors.outer_power(w, k))
    uwp = tensors.strict_upper_embed(tensors.outer_power(wp, k))
    diff = uw - uwp
    return n * math.factorial(k - 1) * beta * beta * float(np.dot(diff, diff))


def kl_bound(beta, n, k, dot=None):
    """(2n/k) beta^2 (1 - dot^k); the global bound (2n/k) beta^2 when dot is None."""
    base = 2.0 * n / k * beta * beta
    if dot is None:
        return base
    return base * (1.0 - float(dot) ** k)


def it_lower_bound_beta(k):
    """Below sqrt(k/10) every estimator has expected loss >= 1/32."""
    return math.sqrt(k / 10.0)


def pi_conditions(beta, k, z_norm, init_corr):
    """Power-iteration success conditions: beta >= 2e(k-1)||Z||_op and
    initial correlation >= ((k-1)||Z||_op / beta)^(1/(k-1)); closed (>=)."""
    snr_ok = beta >= 2.0 * math.e * (k - 1) * z_norm
    init_ok = init_corr >= ((k - 1) * z_norm / beta) ** (1.0 / (k - 1))
    return bool(snr_ok and init_ok)


def matrix_pca_correlation(lam):
    """Limiting top-eigenvector overlap sqrt(1 - lambda^-2) above lambda=1, else 0."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if lam <= 1.0:
        return 0.0
    return math.sqrt(1.0 - lam ** (-2))
