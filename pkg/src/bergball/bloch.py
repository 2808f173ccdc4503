"""Bloch-type densities, prenorm estimates and the distortion machinery behind them.

The density of a holomorphic ``f: B^n -> C^n`` is

    D(z) = (1 - |z|^2)^(alpha (n+1) / 2n) |det f'(z)|^(1/n)

and the prenorm is its supremum over the ball. Only lower certificates of the
supremum are produced.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .ball_geometry import BALL_GUARD, BallPoint, check_in_ball
from .errors import ParameterError
from .sampling import axis_grid, ball_qmc, rng_stream


@dataclass(frozen=True)
class BlochParams:
    n: int
    alpha: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha!r}")


def density(f, z, alpha=1.0):
    """Bloch-type density of ``f`` at ``z`` (or at each row of a batch)."""
    z = check_in_ball(z)
    n = f.n
    weight = (1.0 - np.sum(np.abs(z) ** 2, axis=-1)) ** (alpha * (n + 1) / (2.0 * n))
    return weight * np.abs(f.det_jacobian(z)) ** (1.0 / n)


@dataclass(frozen=True)
class PrenormEstimate:
    """Lower certificate of ``sup_z D(z)``.

    ``density(f, arg, alpha)`` reproduces ``value``.
    """

    value: float
    arg: BallPoint
    samples: int
    seed: int
    iterations: int
    converged: bool
    alpha: float = 1.0
    starts: list = field(default_factory=list, repr=False)


def prenorm(f, alpha=1.0, samples=4096, seed=0, refine=10, axis_points=64):
    """Estimate the prenorm of ``f`` from below.

    Scrambled Sobol points in the ball plus a radial grid on the coordinate
    axes are scored; the best ``refine`` of them seed Nelder-Mead ascents in
    real coordinates. Deterministic for a given ``seed``.
    """
    if samples < 1 or refine < 0:
        raise ParameterError("samples must be >= 1 and refine >= 0")
    n = f.n
    pts = np.concatenate([ball_qmc(samples, n, rng_stream(seed, 0), radius=0.9999),
                          axis_grid(n, axis_points, radius=0.999)])
    vals = density(f, pts, alpha)
    order = np.argsort(-vals, kind="stable")
    best_z, best_v = pts[order[0]], float(vals[order[0]])

    expo = alpha * (n + 1) / (2.0 * n)

    def neg(x):
        z = x[:n] + 1j * x[n:]
        rr = float(np.dot(x, x))
        if rr > BALL_GUARD**2:
            return np.inf
        # lean path: skips the public argument checks of density()
        jac = f._jacobian(z[None, :])[0]
        d = jac[0, 0] if n == 1 else np.linalg.det(jac)
        return -((1.0 - rr) ** expo) * abs(d) ** (1.0 / n)

    iterations, converged = 0, True
    starts = []
    for i in order[:refine]:
        x0 = np.concatenate([pts[i].real, pts[i].imag])
        simplex = np.vstack([x0, x0 + 0.02 * np.eye(2 * n)])
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-15,
                                "maxfev": 1500 * n})
        iterations += res.nit
        converged &= bool(res.success)
        starts.append(float(-res.fun))
        if -res.fun > best_v:
            best_v, best_z = float(-res.fun), res.x[:n] + 1j * res.x[n:]
    # recompute at the arg so value and arg agree exactly
    best_v = float(density(f, best_z, alpha))
    return PrenormEstimate(best_v, BallPoint(best_z), samples, seed, iterations, converged,
                           alpha, starts)


def normalize(f, alpha=1.0, **kwargs):
    """Return ``(f / prenorm, estimate)`` so that the estimated prenorm becomes 1."""
    from .holo import scaled

    est = prenorm(f, alpha, **kwargs)
    return scaled(f, 1.0 / est.value), est


# -- constants, profile and distortion bounds ----------------------------------


def constant_M(n):
    """Sharp Lipschitz constant ``(n+2)^(1/2n) ((n+2)/(n+1))^((n+1)/2n)``; ``M(1) = 3 sqrt(3) / 2``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    return (n + 2.0) ** (1.0 / (2 * n)) * ((n + 2.0) / (n + 1.0)) ** ((n + 1.0) / (2 * n))


def a0(alpha, n):
    """Peak location ``1 / sqrt(alpha (n+1) + 1)`` of the profile."""
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    return 1.0 / np.sqrt(alpha * (n + 1) + 1.0)


@dataclass(frozen=True)
class LemmaCProfile:
    """Unimodal profile on ``[0, 1]`` peaking with value 1 at ``a0``."""

    alpha: float = 1.0
    n: int = 1

    def __post_init__(self):
        BlochParams(self.n, self.alpha)

    @property
    def a0(self):
        return a0(self.alpha, self.n)

    def __call__(self, x):
        return lemma_c_profile(x, self.alpha, self.n)


def lemma_c_profile(x, alpha=1.0, n=1):
    """``x (1-x^2)^(k/2) sqrt(k+1) ((k+1)/k)^(k/2)`` with ``k = alpha (n+1)``."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ParameterError("profile argument must lie in [0, 1]")
    k = alpha * (n + 1)
    out = x * (1 - x * x) ** (k / 2) * np.sqrt(k + 1) * ((k + 1) / k) ** (k / 2)
    return float(out) if out.ndim == 0 else out


def m_root(lam, alpha=1.0, n=1):
    """Root of ``profile(x) = lam`` on the increasing branch ``[0, a0]``, by bisection."""
    if not 0.0 < lam <= 1.0:
        raise ParameterError(f"lambda = {lam!r} outside (0, 1]: no root on the branch")
    top = a0(alpha, n)
    if lam == 1.0:
        return top
    lo, hi = 0.0, top
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        r = lemma_c_profile(mid, alpha, n) - lam
        if abs(r) <= 1e-13:
            return mid
        if r < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambda_of_m(m, n, alpha=1.0):
    """Inverse of :func:`m_root`: ``lam = profile(m)`` for ``m`` in ``(0, a0]``."""
    top = a0(alpha, n)
    if not 0.0 < m <= top * (1 + 1e-15):
        raise ParameterError(f"m = {m!r} outside (0, a0] = (0, {top!r}]")
    return lemma_c_profile(min(m, top), alpha, n)


@dataclass(frozen=True)
class DistortionBounds:
    lower: float | None
    upper: float | None
    r_low: float
    r_high: float
    m: float


def distortion_radii(lam, alpha=1.0, n=1):
    """``(m, r_low, r_high)``: the profile root and the radii of validity of both bounds."""
    m = m_root(lam, alpha, n)
    top = a0(alpha, n)
    return m, (top + m) / (1 + top * m), (top - m) / (1 - top * m)


def theoremD_bounds(lam, r, alpha=1.0, n=1):
    """Two-sided distortion bounds on ``|det f'(z)|`` at ``|z| = r`` for normalized ``f``.

    ``lower = lam (m - r) / (m (1 - m r)^p)`` when ``r <= r_low`` and
    ``upper = lam (m + r) / (m (1 + m r)^p)`` when ``r <= r_high``, with
    ``p = alpha (n+1) + 1``; a bound outside its radius is ``None``.
    """
    if not 0 <= r < 1:
        raise ParameterError(f"radius {r!r} outside [0, 1)")
    m, r_low, r_high = distortion_radii(lam, alpha, n)
    p = alpha * (n + 1) + 1
    lower = lam * (m - r) / (m * (1 - m * r) ** p) if r <= r_low else None
    upper = lam * (m + r) / (m * (1 + m * r) ** p) if r <= r_high else None
    return DistortionBounds(lower, upper, r_low, r_high, m)
