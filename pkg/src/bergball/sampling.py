"""Seeded random streams and quasi-random point sets in the complex ball."""

import warnings

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc


def rng_stream(seed, *key):
    """Independent generator for ``key`` derived from ``seed`` (counter-mode split)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def _sobol(count, dim, rng):
    sampler = qmc.Sobol(d=dim, scramble=True, seed=rng)
    with warnings.catch_warnings():
        # balance warning for non power-of-two counts is irrelevant here
        warnings.simplefilter("ignore", UserWarning)
        return sampler.random(count)


def ball_qmc(count, n, rng, radius=1.0, rmin=0.0):
    """Scrambled Sobol points spread uniformly (in volume) over a shell of the ball.

    Points live in the shell ``rmin <= |z| < radius`` of complex dimension ``n``.
    The unit cube is mapped by Gaussian inversion for the direction and the
    volume-preserving radial law ``r = u**(1/2n)``.

    Returns an array of shape ``(count, n)``, complex.
    """
    u = _sobol(count, 2 * n + 1, rng)
    eps = 1e-12
    g = ndtri(np.clip(u[:, : 2 * n], eps, 1 - eps))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    d = 2 * n
    lo, hi = (rmin / radius) ** d, 1.0
    r = radius * (lo + (hi - lo) * u[:, -1]) ** (1.0 / d)
    x = g * r[:, None]
    return x[:, :n] + 1j * x[:, n:]


def disk_grid(count, radius=0.999):
    """Deterministic polar grid of about ``count`` points in the disk ``|z| <= radius``."""
    nr = max(int(np.sqrt(count / 4.0)), 2)
    nt = max(count // nr, 4)
    r = radius * (np.arange(1, nr + 1) - 0.5) / nr
    t = 2 * np.pi * np.arange(nt) / nt
    z = (r[:, None] * np.exp(1j * t[None, :])).ravel()
    return np.concatenate([[0j], z])


def axis_grid(n, per_axis=64, radius=0.999):
    """Points ``t * u * e_k`` on each coordinate axis, ``u`` in {1, i, -1, -i}."""
    t = radius * np.arange(1, per_axis + 1) / per_axis
    units = np.array([1, 1j, -1, -1j])
    pts = []
    for k in range(n):
        for u in units:
            p = np.zeros((per_axis, n), dtype=complex)
            p[:, k] = t * u
            pts.append(p)
    out = np.concatenate(pts, axis=0)
    return np.concatenate([np.zeros((1, n), dtype=complex), out], axis=0)


def unit_directions(count, n, rng):
    """Uniformly random unit vectors in C^n, shape ``(count, n)``."""
    g = rng.standard_normal((count, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, :n] + 1j * g[:, n:]
