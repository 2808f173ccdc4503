"""Geometry of the complex unit ball with its Bergman metric.

Points are numpy arrays of shape ``(n,)``; most routines also accept a batch
of shape ``(k, n)`` and then return one value per row.
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from .errors import DimensionError, DomainError, ParameterError, ToleranceNotMet

#: numeric routines refuse points with |z| above this radius
BALL_GUARD = 1.0 - 1e-12


def _vec(z):
    if isinstance(z, BallPoint):
        return z.coords
    return np.asarray(z, dtype=complex)


def check_in_ball(z, guard=BALL_GUARD):
    """Return ``z`` as a complex array after checking ``|z| <= guard`` row-wise."""
    z = _vec(z)
    if z.ndim == 0:
        z = z.reshape(1)
    r = np.linalg.norm(z, axis=-1)
    if np.any(~np.isfinite(r)) or np.any(r > guard):
        bad = float(np.max(np.where(np.isfinite(r), r, np.inf)))
        raise DomainError(f"point outside the ball: |z| = {bad!r} > {guard!r}")
    return z


@dataclass(frozen=True, eq=False)
class BallPoint:
    """A point of the open unit ball in C^n with its norm cached."""

    coords: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=complex).reshape(-1)
        c.setflags(write=False)
        r = float(np.linalg.norm(c))
        if not r <= BALL_GUARD:
            raise DomainError(f"|z| = {r!r} is not inside the unit ball")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "norm", r)

    @property
    def n(self):
        return self.coords.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, BallPoint):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"BallPoint({self.coords.tolist()!r})"


def herm_inner(z, w):
    """Hermitian inner product ``sum_k z_k * conj(w_k)`` (row-wise for batches)."""
    z, w = _vec(z), _vec(w)
    if z.shape[-1:] != w.shape[-1:]:
        raise DimensionError(f"dimension mismatch: {z.shape[-1:]} vs {w.shape[-1:]}")
    return np.sum(z * np.conj(w), axis=-1)


def bergman_matrix(z):
    """Bergman matrix ``((1-|z|^2) I + z z^*) / (1-|z|^2)^2``."""
    z = check_in_ball(z)
    d = 1.0 - np.sum(np.abs(z) ** 2, axis=-1)
    outer = z[..., :, None] * np.conj(z[..., None, :])
    eye = np.eye(z.shape[-1])
    d = np.asarray(d)[..., None, None]
    return (d * eye + outer) / d**2


def bergman_quadratic_form(z, v):
    """``<B(z) v, v>`` without forming the matrix; rows of ``z`` pair with rows of ``v``."""
    z, v = _vec(z), _vec(v)
    d = 1.0 - np.sum(np.abs(z) ** 2, axis=-1)
    vv = np.sum(np.abs(v) ** 2, axis=-1)
    vz = np.abs(np.sum(v * np.conj(z), axis=-1)) ** 2
    return vv / d + vz / d**2


# -- automorphisms -------------------------------------------------------------


def _mobius_parts(a, z):
    # numerator a - s z - <z,a> a / (1+s), denominator 1 - <z,a>
    s = np.sqrt(1.0 - np.sum(np.abs(a) ** 2, axis=-1))[..., None]
    za = np.sum(z * np.conj(a), axis=-1)[..., None]
    num = a - s * z - za * a / (1.0 + s)
    den = 1.0 - za
    return num, den, s


def mobius(a, z):
    """Evaluate the involutive automorphism ``phi_a`` at ``z``.

    ``phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>)`` with ``P_a`` the
    projection onto ``span(a)``, ``Q_a = I - P_a`` and ``s_a = sqrt(1-|a|^2)``.
    Rows of a batched ``a`` pair with rows of ``z``.
    """
    a, z = check_in_ball(a), check_in_ball(z)
    num, den, _ = _mobius_parts(a, z)
    return num / den


def mobius_jacobian(a, z):
    """Holomorphic Jacobian of ``phi_a`` at ``z``, shape ``(..., n, n)``."""
    a, z = check_in_ball(a), check_in_ball(z)
    num, den, s = _mobius_parts(a, z)
    n = z.shape[-1]
    ca = np.conj(a)
    dnum = -s[..., None] * np.eye(n) - (a[..., :, None] * ca[..., None, :]) / (1.0 + s[..., None])
    return dnum / den[..., None] + num[..., :, None] * ca[..., None, :] / den[..., None] ** 2


def mobius_auto(a):
    """Automorphism ``phi_a`` as a :class:`~bergball.holo.HoloMap`."""
    from .holo import MobiusMap

    return MobiusMap(a)


def mobius_jacobian_det_modulus(a, z):
    """``|det phi_a'(z)| = ((1-|phi_a(z)|^2)/(1-|z|^2))^((n+1)/2)``.

    Uses ``1-|phi_a(z)|^2 = (1-|a|^2)(1-|z|^2)/|1-<z,a>|^2`` so the result is
    ``((1-|a|^2)/|1-<z,a>|^2)^((n+1)/2)``.
    """
    a, z = check_in_ball(a), check_in_ball(z)
    n = z.shape[-1]
    aa = np.sum(np.abs(a) ** 2, axis=-1)
    za = np.sum(z * np.conj(a), axis=-1)
    return ((1.0 - aa) / np.abs(1.0 - za) ** 2) ** ((n + 1) / 2.0)


# -- distances -----------------------------------------------------------------


def pseudo_hyperbolic(z, w):
    """Pseudo-hyperbolic distance ``|phi_z(w)|``; exactly 0 when ``z == w``."""
    z, w = check_in_ball(z), check_in_ball(w)
    num, den, _ = _mobius_parts(z, w)
    # scaled norm so that tiny separations do not underflow to zero
    scale = np.max(np.abs(num), axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    rho = scale[..., 0] * np.linalg.norm(num / safe, axis=-1) / np.abs(den[..., 0])
    same = np.all(z == w, axis=-1)
    return np.where(same, 0.0, np.minimum(rho, BALL_GUARD))


def bergman_distance(z, w):
    """Bergman distance ``artanh(rho(z, w))``."""
    return np.arctanh(pseudo_hyperbolic(z, w))


# -- curves and length ---------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    """Piecewise-smooth path ``[0, 1] -> ball``.

    ``point`` and ``velocity`` take a 1-d array of parameters and return arrays
    of shape ``(len(t), n)``; ``velocity`` is ``d/dt``. ``breakpoints`` lists
    interior parameters where smoothness may fail.
    """

    point: Callable[[np.ndarray], np.ndarray]
    velocity: Callable[[np.ndarray], np.ndarray]
    breakpoints: Sequence[float] = ()

    def __call__(self, t):
        return self.point(np.atleast_1d(np.asarray(t, dtype=float)))

    def segments(self):
        edges = [0.0, *sorted(b for b in self.breakpoints if 0.0 < b < 1.0), 1.0]
        return list(zip(edges[:-1], edges[1:]))


def constant_curve(z):
    z = check_in_ball(z)
    return Curve(
        lambda t: np.broadcast_to(z, (np.size(t), z.shape[-1])),
        lambda t: np.zeros((np.size(t), z.shape[-1]), dtype=complex),
    )


def segment(z, w):
    """Straight chord from ``z`` to ``w``."""
    z, w = check_in_ball(z), check_in_ball(w)
    d = w - z
    return Curve(lambda t: z + np.asarray(t)[:, None] * d,
                 lambda t: np.broadcast_to(d, (np.size(t), d.shape[-1])))


def radial_geodesic(z, w):
    """Geodesic from ``z`` to ``w``: the radius towards ``phi_z(w)`` pulled back by ``phi_z``.

    Parametrized at constant Bergman speed, so the integrand of the length is
    the constant ``bergman_distance(z, w)``.
    """
    z, w = check_in_ball(z), check_in_ball(w)
    if np.array_equal(z, w):
        return constant_curve(z)
    u = mobius(z, w)
    # rescale first so tiny separations do not underflow |u|^2
    scale = np.max(np.abs(u))
    if scale == 0:
        return constant_curve(z)
    v = u / scale
    u_hat = v / np.linalg.norm(v)
    r = scale * np.linalg.norm(v)
    beta = np.arctanh(r)
    zz = np.broadcast_to(z, (1, z.shape[-1]))

    def point(t):
        p = np.tanh(np.asarray(t) * beta)[:, None] * u_hat
        return mobius(np.broadcast_to(z, p.shape), p)

    def velocity(t):
        t = np.asarray(t)
        p = np.tanh(t * beta)[:, None] * u_hat
        dp = (beta / np.cosh(t * beta) ** 2)[:, None] * u_hat
        jac = mobius_jacobian(np.broadcast_to(zz, p.shape), p)
        return np.einsum("kij,kj->ki", jac, dp)

    return Curve(point, velocity)


def spline_curve(z, w, interior):
    """Cubic spline through ``z``, the interior control points and ``w`` at uniform knots."""
    z, w = check_in_ball(z), check_in_ball(w)
    interior = np.asarray(interior, dtype=complex).reshape(-1, z.shape[-1])
    nodes = np.vstack([z, interior, w])
    knots = np.linspace(0.0, 1.0, nodes.shape[0])
    cs = CubicSpline(knots, nodes, axis=0)
    dcs = cs.derivative()
    return Curve(lambda t: cs(np.asarray(t)), lambda t: dcs(np.asarray(t)),
                 breakpoints=tuple(knots[1:-1]))


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate a curve's Bergman speed.

    ``method`` is ``"adaptive"`` (panel bisection driven by the difference
    between a panel's Gauss value and the sum over its halves) or ``"fixed"``
    (``max_subdivisions`` equal panels per smooth piece, no error control).
    """

    method: str = "adaptive"
    tol: float = 1e-10
    max_subdivisions: int = 2**14
    order: int = 20

    def __post_init__(self):
        if self.method not in ("adaptive", "fixed"):
            raise ParameterError(f"unknown quadrature method {self.method!r}")
        if not self.tol > 0:
            raise ParameterError("quadrature tolerance must be positive")
        if self.max_subdivisions < 1:
            raise ParameterError("max_subdivisions must be >= 1")


_GAUSS_CACHE = {}


def _gauss_rule(order):
    if order not in _GAUSS_CACHE:
        _GAUSS_CACHE[order] = leggauss(order)
    return _GAUSS_CACHE[order]


def _panel_integrals(func, a, b, order):
    x, wts = _gauss_rule(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    t = mid[:, None] + half[:, None] * x[None, :]
    vals = func(t.ravel()).reshape(t.shape)
    return (vals @ wts) * half


def _speed(curve):
    def f(t):
        p = curve.point(t)
        r = np.linalg.norm(p, axis=-1)
        if np.any(r > BALL_GUARD):
            raise DomainError(f"curve leaves the ball: |gamma(t)| = {float(r.max())!r}")
        q = bergman_quadratic_form(p, curve.velocity(t))
        return np.sqrt(np.maximum(q, 0.0))

    return f


def integrate(func, edges, spec=QuadratureSpec()):
    """Integrate a vectorized real ``func`` over consecutive intervals ``edges``."""
    a = np.array([e[0] for e in edges], dtype=float)
    b = np.array([e[1] for e in edges], dtype=float)
    if spec.method == "fixed":
        k = spec.max_subdivisions
        fr = np.linspace(0.0, 1.0, k + 1)
        lo = (a[:, None] + (b - a)[:, None] * fr[None, :-1]).ravel()
        hi = (a[:, None] + (b - a)[:, None] * fr[None, 1:]).ravel()
        return float(np.sum(_panel_integrals(func, lo, hi, spec.order)))

    total = 0.0
    whole = _panel_integrals(func, a, b, spec.order)
    used = len(a)
    while a.size:
        m = 0.5 * (a + b)
        left = _panel_integrals(func, a, m, spec.order)
        right = _panel_integrals(func, m, b, spec.order)
        both = left + right
        err = np.abs(both - whole)
        ok = (err <= spec.tol * (b - a)) | (b - a < 1e-14)
        total += float(np.sum(both[ok]))
        bad = ~ok
        used += int(np.count_nonzero(bad))
        if used > spec.max_subdivisions:
            best = total + float(np.sum(both[bad]))
            raise ToleranceNotMet(
                f"quadrature did not reach tol={spec.tol:g} within "
                f"{spec.max_subdivisions} panels", best)
        a, m, b = a[bad], m[bad], b[bad]
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        whole = np.concatenate([left[bad], right[bad]])
    return total


def curve_length(curve, spec=QuadratureSpec()):
    """Bergman length ``int_0^1 <B(g(t)) g'(t), g'(t)>^(1/2) dt`` of ``curve``."""
    return integrate(_speed(curve), curve.segments(), spec)


# -- variational distance ------------------------------------------------------


@dataclass(frozen=True)
class GeodesicResult:
    length: float
    converged: bool
    control: np.ndarray
    nfev: int


def geodesic_infimum(z, w, control_points=8, starts=("chord", "geodesic"),
                     maxiter=400, spec=QuadratureSpec()):
    """Minimize the Bergman length over splines with ``control_points`` free nodes.

    Endpoints are pinned to ``z`` and ``w``. Each start is descended with
    L-BFGS-B on a fixed Gauss-rule length and its exact gradient; the
    winner is re-measured with ``spec``. Returns a :class:`GeodesicResult`
    whose ``converged`` flag is false when the optimizer hit its budget.
    """
    z, w = check_in_ball(z), check_in_ball(w)
    n = z.shape[-1]
    if np.array_equal(z, w):
        return GeodesicResult(0.0, True, np.broadcast_to(z, (control_points, n)).copy(), 0)
    all_knots = np.linspace(0.0, 1.0, control_points + 2)
    knots = all_knots[1:-1]
    # the interpolating spline is linear in its nodes: precompute its basis
    # and derivative at Gauss nodes of every knot span
    x, wq = _gauss_rule(24)
    lo, hi = all_knots[:-1], all_knots[1:]
    tq = (0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]).ravel()
    wq = (0.5 * (hi - lo)[:, None] * wq[None, :]).ravel()
    basis = CubicSpline(all_knots, np.eye(control_points + 2), axis=0)
    b_pt, b_vel = basis(tq), basis.derivative()(tq)
    fixed_pt = b_pt[:, [0]] * z + b_pt[:, [-1]] * w
    fixed_vel = b_vel[:, [0]] * z + b_vel[:, [-1]] * w
    b_pt, b_vel = b_pt[:, 1:-1], b_vel[:, 1:-1]

    def unpack(x):
        x = x.reshape(control_points, 2 * n)
        return x[:, :n] + 1j * x[:, n:]

    def objective(x):
        ctrl = unpack(x)
        p = fixed_pt + b_pt @ ctrl
        v = fixed_vel + b_vel @ ctrl
        r = np.max(np.linalg.norm(p, axis=1))
        if r > 0.999:
            return 1e3 + r, np.zeros_like(x)
        d = (1.0 - np.sum(np.abs(p) ** 2, axis=1))[:, None]
        vv = np.sum(np.abs(v) ** 2, axis=1)[:, None]
        s = np.sum(v * np.conj(p), axis=1)[:, None]
        q = vv / d + np.abs(s) ** 2 / d**2
        speed = np.sqrt(q)
        # Wirtinger derivatives of q in conj(p) and conj(v)
        dq_p = vv * p / d**2 + v * np.conj(s) / d**2 + 2 * np.abs(s) ** 2 * p / d**3
        dq_v = v / d + s * p / d**2
        c = (wq / (2.0 * speed[:, 0]))[:, None]
        g = b_pt.T @ (c * dq_p) + b_vel.T @ (c * dq_v)
        grad = np.concatenate([2 * g.real, 2 * g.imag], axis=1).ravel()
        return float(wq @ speed[:, 0]), grad

    inits = []
    for s in starts:
        if s == "chord":
            inits.append(z + knots[:, None] * (w - z))
        elif s == "geodesic":
            inits.append(radial_geodesic(z, w)(knots))
        else:
            raise ParameterError(f"unknown start {s!r}")

    best, nfev = None, 0
    for ctrl in inits:
        x0 = np.concatenate([ctrl.real, ctrl.imag], axis=1).ravel()
        res = minimize(objective, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": maxiter, "ftol": 1e-12, "gtol": 1e-9})
        nfev += res.nfev
        if best is None or res.fun < best.fun:
            best = res
    ctrl = unpack(best.x)
    length = curve_length(spline_curve(z, w, ctrl), spec)
    # L-BFGS-B reports ABNORMAL when the line search stalls at the optimum
    converged = bool(best.success or best.status == 2)
    return GeodesicResult(length, converged, ctrl, nfev)
