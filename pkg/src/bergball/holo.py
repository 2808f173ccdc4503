"""Holomorphic maps of the ball into C^n with exact Jacobians.

Maps form a small closed algebra: polynomials, the extremal family, ball
automorphisms, compositions, block-diagonal stacks and row scalings. Every
kind knows how to evaluate itself and its holomorphic Jacobian on a batch of
points, so no numerical differentiation enters the certification path.
"""

import itertools

import numpy as np

from .ball_geometry import BALL_GUARD, check_in_ball, mobius, mobius_jacobian
from .bloch import a0, lambda_of_m, m_root
from .errors import (DegenerateDeterminant, DimensionError, DomainError,
                     ParameterError, RangeViolation)
from .sampling import ball_qmc, rng_stream

RANGE_CHECK_SAMPLES = 10_000


class HoloMap:
    """Base class. Subclasses implement ``_eval`` and ``_jacobian`` on ``(k, n)`` batches."""

    kind = None
    n = None
    children = ()

    def _prep(self, z):
        z = check_in_ball(z)
        single = z.ndim == 1
        z = np.atleast_2d(z)
        if z.shape[1] != self.n:
            raise DimensionError(f"{self.kind} map has dimension {self.n}, got points of dimension {z.shape[1]}")
        return z, single

    def eval(self, z):
        """Value at ``z`` (shape ``(n,)``) or at each row of a ``(k, n)`` batch."""
        z, single = self._prep(z)
        out = self._eval(z)
        return out[0] if single else out

    __call__ = eval

    def jacobian(self, z):
        """Holomorphic Jacobian ``f'(z)``, shape ``(n, n)`` or ``(k, n, n)``."""
        z, single = self._prep(z)
        out = self._jacobian(z)
        return out[0] if single else out

    def det_jacobian(self, z):
        z, single = self._prep(z)
        jac = self._jacobian(z)
        d = jac[:, 0, 0] if self.n == 1 else np.linalg.det(jac)
        return d[0] if single else d

    def second_derivative(self, z):
        """``f''(z)`` for one-dimensional maps."""
        if self.n != 1:
            raise DimensionError("second_derivative is defined for n = 1 only")
        z, single = self._prep(z)
        out = self._d2(z[:, 0])
        return out[0] if single else out

    def _d2(self, z):
        raise NotImplementedError(f"no second derivative rule for {self.kind}")

    def params(self):
        return {}

    def __repr__(self):
        from .mapfile import dumps

        return dumps(self)


class PolynomialMap(HoloMap):
    """``f_i(z) = sum_m coef[i, m] * z**exps[m]`` with multi-indices ``exps``."""

    kind = "polynomial"

    def __init__(self, exps, coef):
        exps = np.asarray(exps, dtype=int)
        coef = np.asarray(coef, dtype=complex)
        if exps.ndim != 2 or coef.ndim != 2:
            raise ParameterError("exps and coef must be 2-d tables")
        if np.any(exps < 0):
            raise ParameterError("exponents must be nonnegative")
        n = exps.shape[1]
        if coef.shape != (n, exps.shape[0]):
            raise ParameterError(f"coef must have shape {(n, exps.shape[0])}, got {coef.shape}")
        self.n = n
        self.exps = exps
        self.coef = coef

    @property
    def degree(self):
        return int(self.exps.sum(axis=1).max(initial=0))

    @staticmethod
    def _mono(z, exps):
        return np.prod(z[:, None, :] ** exps[None, :, :], axis=2)

    def _eval(self, z):
        return self._mono(z, self.exps) @ self.coef.T

    def _jacobian(self, z):
        k = z.shape[0]
        jac = np.empty((k, self.n, self.n), dtype=complex)
        for j in range(self.n):
            e = self.exps.copy()
            mult = e[:, j].astype(float)
            e[:, j] = np.maximum(e[:, j] - 1, 0)
            jac[:, :, j] = (self._mono(z, e) * mult) @ self.coef.T
        return jac

    def _d2(self, z):
        e = self.exps[:, 0]
        mult = e * (e - 1)
        return (z[:, None] ** np.maximum(e - 2, 0)[None, :] * mult) @ self.coef[0]

    def scaled(self, c):
        return PolynomialMap(self.exps, self.coef * c)

    def params(self):
        return {"n": self.n, "exps": self.exps.tolist(), "coef": self.coef.tolist()}


def identity(n):
    return PolynomialMap(np.eye(n, dtype=int), np.eye(n))


def monomial_exponents(n, degree):
    """All multi-indices in ``n`` variables of total degree at most ``degree``."""
    return np.array([e for e in itertools.product(range(degree + 1), repeat=n)
                     if sum(e) <= degree], dtype=int)


def random_polynomial(n, degree, rng):
    """Polynomial map with centered complex Gaussian coefficients (unnormalized)."""
    exps = monomial_exponents(n, degree)
    shape = (n, exps.shape[0])
    coef = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return PolynomialMap(exps, coef)


class ExtremalMap(HoloMap):
    """Extremal family: first component integrates the distortion bound, the rest is identity.

    ``det f'(z) = lam (m - z_1) / (m (1 - m z_1)^p)`` with ``p = alpha (n + 1) + 1``.
    """

    kind = "extremal"

    def __init__(self, m, n, alpha=1.0, lam=None):
        n, alpha, m = int(n), float(alpha), float(m)
        if n < 1 or not alpha > 0:
            raise ParameterError("need n >= 1 and alpha > 0")
        top = a0(alpha, n)
        if not 0.0 < m <= top * (1 + 1e-15):
            raise ParameterError(f"m = {m!r} outside (0, a0] = (0, {top!r}]")
        self.n, self.alpha, self.m = n, alpha, min(m, top)
        self.lam = lambda_of_m(self.m, n, alpha) if lam is None else float(lam)
        self.p = alpha * (n + 1) + 1

    @classmethod
    def from_lambda(cls, lam, n, alpha=1.0):
        """Map with ``det f'(0) = lam`` exactly and ``m`` the profile root of ``lam``."""
        return cls(m_root(lam, alpha, n), n, alpha, lam=lam)

    def first_component(self, z1):
        """Closed-form antiderivative of the determinant profile, vanishing at 0."""
        m, lam, p = self.m, self.lam, self.p
        log_u = np.log1p(-m * np.asarray(z1, dtype=complex))
        i1 = np.expm1((1 - p) * log_u) / (1 - p)
        if abs(p - 2) < 1e-15:
            i2 = log_u
        else:
            i2 = np.expm1((2 - p) * log_u) / (2 - p)
        return -lam / m**3 * ((m * m - 1) * i1 + i2)

    def first_derivative(self, z1):
        m = self.m
        return self.lam * (m - z1) / (m * (1 - m * z1) ** self.p)

    def _eval(self, z):
        out = z.astype(complex, copy=True)
        out[:, 0] = self.first_component(z[:, 0])
        return out

    def _jacobian(self, z):
        jac = np.broadcast_to(np.eye(self.n, dtype=complex), (z.shape[0], self.n, self.n)).copy()
        jac[:, 0, 0] = self.first_derivative(z[:, 0])
        return jac

    def _d2(self, z):
        m, p = self.m, self.p
        u = 1 - m * z
        return self.lam / m * (-(u ** -p) + (m - z) * p * m * u ** (-p - 1))

    def params(self):
        return {"m": self.m, "n": self.n, "alpha": self.alpha, "lam": self.lam}


def extremal_map(m, n, alpha=1.0):
    return ExtremalMap(m, n, alpha)


class MobiusMap(HoloMap):
    """Involutive automorphism ``phi_a`` exchanging ``0`` and ``a``."""

    kind = "automorphism"

    def __init__(self, a):
        a = check_in_ball(np.atleast_1d(np.asarray(a, dtype=complex)))
        self.a = a.reshape(-1)
        self.n = self.a.shape[0]

    def _eval(self, z):
        return mobius(np.broadcast_to(self.a, z.shape), z)

    def _jacobian(self, z):
        return mobius_jacobian(np.broadcast_to(self.a, z.shape), z)

    def _d2(self, z):
        a = self.a[0]
        return -2 * np.conj(a) * (1 - abs(a) ** 2) / (1 - np.conj(a) * z) ** 3

    def params(self):
        return {"a": self.a.tolist()}


def check_range(phi, samples=RANGE_CHECK_SAMPLES, seed=0):
    """Sample ``phi`` on quasi-random ball points; raise :class:`RangeViolation` if any image leaves the ball."""
    if isinstance(phi, MobiusMap):
        return
    z = ball_qmc(samples, phi.n, rng_stream(seed, 0xBA11), radius=BALL_GUARD)
    r = np.linalg.norm(phi._eval(z), axis=1)
    bad = np.flatnonzero(~(r < 1.0))
    if bad.size:
        i = bad[np.argmax(r[bad])]
        raise RangeViolation(f"{phi.kind} map sends z = {z[i].tolist()} to |phi(z)| = {r[i]!r}",
                             witness=z[i])


class Composition(HoloMap):
    """``outer o inner``; the Jacobian follows the chain rule."""

    kind = "composition"

    def __init__(self, outer, inner, check=True):
        if outer.n != inner.n:
            raise DimensionError(f"cannot compose dimension {outer.n} with {inner.n}")
        if check:
            check_range(inner)
        self.outer, self.inner = outer, inner
        self.n = outer.n
        self.children = (outer, inner)

    def _inner_values(self, z):
        w = self.inner._eval(z)
        r = np.linalg.norm(w, axis=1)
        if np.any(~(r <= BALL_GUARD)):
            i = int(np.argmax(np.where(np.isfinite(r), r, np.inf)))
            raise DomainError(f"child 1 ({self.inner.kind}) leaves the ball: "
                              f"z = {z[i].tolist()} -> |w| = {r[i]!r}")
        return w

    def _eval(self, z):
        return self.outer._eval(self._inner_values(z))

    def _jacobian(self, z):
        w = self._inner_values(z)
        return self.outer._jacobian(w) @ self.inner._jacobian(z)

    def _d2(self, z):
        w = self._inner_values(z[:, None])[:, 0]
        d1 = self.inner._jacobian(z[:, None])[:, 0, 0]
        return self.outer._d2(w) * d1**2 + self.outer._jacobian(w[:, None])[:, 0, 0] * self.inner._d2(z)


def compose(f, phi, check=True):
    """Pre-composition ``C_phi f = f o phi``."""
    return Composition(f, phi, check=check)


class DiagonalStack(HoloMap):
    """Block map ``(f_1(z_block1), f_2(z_block2), ...)``."""

    kind = "diagonal-stack"

    def __init__(self, children):
        self.children = tuple(children)
        if not self.children:
            raise ParameterError("diagonal stack needs at least one child")
        dims = [c.n for c in self.children]
        self.n = sum(dims)
        self._cuts = np.cumsum([0, *dims])

    def _blocks(self):
        return zip(self.children, self._cuts[:-1], self._cuts[1:])

    def _eval(self, z):
        return np.concatenate([c._eval(z[:, lo:hi]) for c, lo, hi in self._blocks()], axis=1)

    def _jacobian(self, z):
        jac = np.zeros((z.shape[0], self.n, self.n), dtype=complex)
        for c, lo, hi in self._blocks():
            jac[:, lo:hi, lo:hi] = c._jacobian(z[:, lo:hi])
        return jac

    def _d2(self, z):
        return self.children[0]._d2(z)


class Rotation(HoloMap):
    """Multiply component ``row`` of ``child`` (all components if ``row`` is None) by ``factor``.

    With a unit ``factor`` this is the normalizing rotation of the
    determinant; other nonzero factors are used to rescale maps.
    """

    kind = "scalar-rotation"

    def __init__(self, child, factor, row=0):
        factor = complex(factor)
        if factor == 0:
            raise ParameterError("rotation factor must be nonzero")
        if row is not None and not 0 <= int(row) < child.n:
            raise ParameterError(f"row {row} out of range for dimension {child.n}")
        self.child, self.factor = child, factor
        self.row = None if row is None else int(row)
        self.n = child.n
        self.children = (child,)

    def _scale(self):
        s = np.ones(self.n, dtype=complex)
        if self.row is None:
            s[:] = self.factor
        else:
            s[self.row] = self.factor
        return s

    def _eval(self, z):
        return self.child._eval(z) * self._scale()

    def _jacobian(self, z):
        return self.child._jacobian(z) * self._scale()[:, None]

    def _d2(self, z):
        return self.factor * self.child._d2(z)

    def params(self):
        return {"factor": self.factor, "row": self.row}


def scaled(f, c):
    """The map ``c * f``."""
    if isinstance(f, PolynomialMap):
        return f.scaled(c)
    return Rotation(f, c, row=None)


def rotate_to_positive_det(f):
    """Rotate the first component so that ``det f'(0)`` becomes ``lam = |det f'(0)| > 0``.

    Returns ``(g, lam, theta)`` where ``det f'(0) = lam * exp(i theta)``.
    Raises :class:`DegenerateDeterminant` when ``det f'(0) == 0``.
    """
    d = complex(f.det_jacobian(np.zeros(f.n)))
    lam = abs(d)
    if lam == 0.0:
        raise DegenerateDeterminant("det f'(0) = 0: nothing to normalize")
    theta = float(np.angle(d)) % (2 * np.pi)
    if theta == 0.0:
        return f, lam, 0.0
    return Rotation(f, np.exp(-1j * theta), row=0), lam, theta


def oracle_jacobian(f, z, h=1e-4, points=16, method="contour"):
    """Numerical Jacobian used to validate the exact rules.

    ``method="contour"`` averages ``f(z + h w^k e_j) w^-k`` over the ``points``
    roots of unity ``w^k``: the complex-step idea applied to a holomorphic map,
    exact for polynomials of degree below ``points`` up to rounding.
    ``method="central"`` is the plain central difference with step ``h``.
    """
    z = check_in_ball(z).reshape(-1)
    if not 0 < h <= 0.1:
        raise ParameterError(f"step h = {h!r} outside (0, 0.1]")
    if np.linalg.norm(z) + h > BALL_GUARD:
        raise DomainError("step too large for the distance to the boundary")
    n = z.shape[0]
    jac = np.empty((n, n), dtype=complex)
    if method == "contour":
        roots = np.exp(2j * np.pi * np.arange(points) / points)
        for j in range(n):
            pts = np.broadcast_to(z, (points, n)).copy()
            pts[:, j] += h * roots
            jac[:, j] = (np.conj(roots) @ f.eval(pts)) / (points * h)
    elif method == "central":
        for j in range(n):
            e = np.zeros(n, dtype=complex)
            e[j] = h
            jac[:, j] = (f.eval(z + e) - f.eval(z - e)) / (2 * h)
    else:
        raise ParameterError(f"unknown oracle method {method!r}")
    return jac
