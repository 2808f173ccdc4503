"""Certification campaigns for the Lipschitz, derivative, distortion and composition bounds.

Each ``check_*`` function samples the relevant inequality over deterministic,
seeded point sets and returns a :class:`VerificationReport`. Prenorms are only
ever estimated from below, so every bound that involves one is widened by a
relative slack ``sup_tol``.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import __version__
from .ball_geometry import (BALL_GUARD, QuadratureSpec, bergman_distance, check_in_ball,
                            curve_length, geodesic_infimum, pseudo_hyperbolic,
                            radial_geodesic)
from .bloch import (a0, constant_M, density, distortion_radii, normalize,
                    prenorm)
from .errors import (CriticalPoint, DegenerateDeterminant, DegeneratePair,
                     ParameterError)
from .holo import (ExtremalMap, MobiusMap, compose, extremal_map,
                   random_polynomial, rotate_to_positive_det)
from .mapfile import dumps
from .sampling import (ball_qmc, disk_grid, rng_stream, unit_directions)

THEOREM_A_CONSTANT = 3.31
SQRT27_HALF = 1.5 * np.sqrt(3.0)


def _cplx(z):
    """JSON-friendly ``[[re, im], ...]`` encoding of a complex vector."""
    return [[float(c.real), float(c.imag)] for c in np.atleast_1d(z)]


def uncplx(pairs):
    return np.array([complex(re, im) for re, im in pairs])


@dataclass
class VerificationReport:
    """Outcome of one campaign.

    ``passed`` is true exactly when ``violations`` is empty. A campaign whose
    hypotheses could not be established is marked ``applicable = False``.
    """

    theorem: str
    params: dict
    statistics: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    applicable: bool = True
    notes: list = field(default_factory=list)
    rows: list = field(default_factory=list, repr=False)
    runtime: float = 0.0

    @property
    def passed(self):
        return not self.violations

    @property
    def status(self):
        if not self.applicable:
            return "inapplicable"
        return "pass" if self.passed else "fail"

    def to_dict(self):
        return {
            "command": self.theorem,
            "params": self.params,
            "seed": self.params.get("seed"),
            "version": __version__,
            "statistics": self.statistics,
            "violations": self.violations,
            "pass": self.passed,
            "applicable": self.applicable,
            "status": self.status,
            "notes": self.notes,
            "runtime": self.runtime,
        }


def _finish(report, t0):
    report.violations.sort(key=lambda v: (-v["excess"], str(v.get("map", "")), str(v.get("inputs"))))
    report.runtime = time.perf_counter() - t0
    return report


# -- Lipschitz bound -----------------------------------------------------------


def lipschitz_ratio(f, z1, z2, alpha=1.0):
    """``|D(z2) - D(z1)| / tanh(beta(z1, z2))^(1/n)``, row-wise for batches."""
    z1, z2 = check_in_ball(z1), check_in_ball(z2)
    rho = pseudo_hyperbolic(z1, z2)
    if np.any(rho == 0):
        raise DegeneratePair("ratio undefined for coincident points")
    return np.abs(density(f, z2, alpha) - density(f, z1, alpha)) / rho ** (1.0 / f.n)


def sample_pairs(n, count, rng):
    """Pairs ``(z1, z2)`` mixing uniform, near-diagonal, near-boundary and axis pairs."""
    n_uni, n_diag, n_bdry = 4 * count // 10, 3 * count // 10, 2 * count // 10
    n_axis = count - n_uni - n_diag - n_bdry
    z1 = [ball_qmc(n_uni, n, rng, radius=0.999)]
    z2 = [ball_qmc(n_uni, n, rng, radius=0.999)]

    base = ball_qmc(n_diag, n, rng, radius=0.99)
    step = 1e-3 * rng.uniform(0.1, 1.0, n_diag)[:, None] * unit_directions(n_diag, n, rng)
    near = base + step
    r = np.linalg.norm(near, axis=1, keepdims=True)
    near = np.where(r > 0.999, near * 0.999 / r, near)
    z1.append(base)
    z2.append(near)

    z1.append(ball_qmc(n_bdry, n, rng, radius=0.999, rmin=0.9))
    z2.append(ball_qmc(n_bdry, n, rng, radius=0.999, rmin=0.9))

    # origin to a point on a coordinate axis, where the extremal family lives
    t = np.linspace(0.999, 0.0, n_axis, endpoint=False)[::-1]
    axes = np.arange(n_axis) % n
    phase = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n_axis) * (np.arange(n_axis) % 2))
    ax = np.zeros((n_axis, n), dtype=complex)
    ax[np.arange(n_axis), axes] = t * phase
    z1.append(np.zeros((n_axis, n), dtype=complex))
    z2.append(ax)

    z1, z2 = np.concatenate(z1), np.concatenate(z2)
    keep = ~np.all(z1 == z2, axis=1)
    return z1[keep], z2[keep]


class NotNormalized(ParameterError):
    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


def _check_normalized(f, est, index, tol=1e-6):
    if abs(est.value - 1.0) > tol:
        raise NotNormalized(f"map {index} is not prenorm-normalized: estimate {est.value!r}", est)


def check_theorem1(battery, n=None, pairs=10_000, seed=0, sup_tol=1e-6, assert_tol=1e-9,
                   prenorm_samples=4096):
    """Sample the Lipschitz inequality ``ratio <= M(n) ||f||`` for every map of ``battery``."""
    t0 = time.perf_counter()
    n = battery[0].n if n is None else n
    M = constant_M(n)
    report = VerificationReport("thm1", {"n": n, "alpha": 1.0, "pairs": pairs, "seed": seed,
                                         "maps": len(battery), "sup_tol": sup_tol,
                                         "assert_tol": assert_tol})
    max_ratio, witness, worst_margin = -np.inf, None, np.inf
    for i, f in enumerate(battery):
        if f.n != n:
            raise ParameterError(f"map {i} has dimension {f.n}, expected {n}")
        est = prenorm(f, samples=prenorm_samples, seed=seed)
        _check_normalized(f, est, i)
        bound = M * est.value * (1 + assert_tol) + M * est.value * sup_tol
        z1, z2 = sample_pairs(n, pairs, rng_stream(seed, 1, i))
        ratio = lipschitz_ratio(f, z1, z2)
        j = int(np.argmax(ratio))
        spec = dumps(f)
        report.rows.append({"map": i, "spec": spec, "z1": _cplx(z1[j]), "z2": _cplx(z2[j]),
                            "computed": float(ratio[j]), "bound": bound,
                            "margin": bound - float(ratio[j])})
        if ratio[j] > max_ratio:
            max_ratio, witness = float(ratio[j]), {"map": i, "z1": _cplx(z1[j]), "z2": _cplx(z2[j])}
        worst_margin = min(worst_margin, bound - float(ratio[j]))
        for k in np.flatnonzero(ratio > bound):
            report.violations.append({"map": i, "spec": spec,
                                      "inputs": {"z1": _cplx(z1[k]), "z2": _cplx(z2[k])},
                                      "computed": float(ratio[k]), "bound": bound,
                                      "excess": float(ratio[k] - bound)})
    report.statistics = {"max_ratio": max_ratio, "bound": M, "margin": worst_margin,
                         "witness": witness, "M": M, "theorem_A_constant": THEOREM_A_CONSTANT}
    return _finish(report, t0)


def replay_theorem1_violation(f, row):
    """Recompute the excess of a Lipschitz violation row."""
    z1, z2 = uncplx(row["inputs"]["z1"]), uncplx(row["inputs"]["z2"])
    return float(lipschitz_ratio(f, z1, z2)) - row["bound"]


@dataclass(frozen=True)
class SharpnessResult:
    ratio: float
    m: float
    target: float
    clamped: bool

    @property
    def passed(self):
        return self.ratio >= self.target - 1e-9


def sharpness_m(eps, n):
    """``m = sqrt(1 - (1 - eps/M)^(2n/(n+1)))``, capped at ``a0(1, n)``; returns ``(m, clamped)``."""
    M = constant_M(n)
    if not 0.0 < eps <= M:
        raise ParameterError(f"eps = {eps!r} outside the admissible interval (0, {M!r}]")
    m = np.sqrt(-np.expm1(2 * n / (n + 1) * np.log1p(-eps / M)))
    top = a0(1.0, n)
    return (float(min(m, top)), bool(m > top))


def sharpness_run(eps, n):
    """Evaluate the extremal ratio between ``0`` and ``(m, 0, ..., 0)``.

    The ratio equals ``M(n) (1 - m^2)^((n+1)/2n)``, which is ``M(n) - eps`` unless
    ``m`` had to be capped at ``a0``, in which case it is larger.
    """
    m, clamped = sharpness_m(eps, n)
    f = extremal_map(m, n)
    z2 = np.zeros(n, dtype=complex)
    z2[0] = m
    ratio = float(lipschitz_ratio(f, np.zeros(n), z2))
    return SharpnessResult(ratio, m, constant_M(n) - eps, clamped)


# -- disk derivative bounds -----------------------------------------------------


def density_derivatives_disk(f, z):
    """Wirtinger derivatives ``(dD/dz, dD/dzbar)`` of ``D(z) = (1-|z|^2) |f'(z)|`` on the disk."""
    if f.n != 1:
        raise ParameterError("density_derivatives_disk needs a one-dimensional map")
    z = np.asarray(z, dtype=complex)
    zz = z.reshape(-1, 1)
    fp = f.jacobian(zz)[:, 0, 0]
    if np.any(np.abs(fp) <= 1e-12):
        raise CriticalPoint("f'(z) vanishes: density is not differentiable there")
    fpp = f.second_derivative(zz)
    zf = zz[:, 0]
    a = np.abs(fp)
    w = 1.0 - np.abs(zf) ** 2
    dz = -np.conj(zf) * a + fpp * np.conj(fp) * w / (2 * a)
    dzbar = -zf * a + np.conj(fpp) * fp * w / (2 * a)
    if z.ndim == 0:
        return complex(dz[0]), complex(dzbar[0])
    return dz, dzbar


def check_theorem2(battery, grid=10_000, seed=0, sup_tol=1e-6, assert_tol=1e-9,
                   prenorm_samples=4096):
    """Check the disk bounds on the density gradient and on ``|f''|`` over a polar grid."""
    t0 = time.perf_counter()
    report = VerificationReport("thm2", {"n": 1, "alpha": 1.0, "grid": grid, "seed": seed,
                                         "maps": len(battery), "sup_tol": sup_tol,
                                         "assert_tol": assert_tol})
    pts = disk_grid(grid, radius=0.999)
    max19, max20, excluded = -np.inf, -np.inf, 0
    for i, f in enumerate(battery):
        if f.n != 1:
            raise ParameterError(f"map {i} is not one-dimensional")
        est = prenorm(f, samples=prenorm_samples, seed=seed)
        _check_normalized(f, est, i)
        P = est.value * (1 + sup_tol)
        fp = f.jacobian(pts[:, None])[:, 0, 0]
        ok = np.abs(fp) > 1e-12
        excluded += int(np.count_nonzero(~ok))
        z = pts[ok]
        dz, dzbar = density_derivatives_disk(f, z)
        w = 1.0 - np.abs(z) ** 2
        lhs19 = w * (np.abs(dz) + np.abs(dzbar))
        bound19 = SQRT27_HALF * P + assert_tol
        lhs20 = np.abs(f.second_derivative(z[:, None]))
        bound20 = (2 * np.abs(z) + SQRT27_HALF) * P / w**2 + assert_tol
        spec = dumps(f)
        # relative use of the bound so that grid points near the rim compare on equal footing
        r19, r20 = lhs19 / bound19, lhs20 / bound20
        max19, max20 = max(max19, float(r19.max())), max(max20, float(r20.max()))
        j = int(np.argmax(r20))
        report.rows.append({"map": i, "spec": spec, "z": _cplx(z[j]), "computed": float(lhs20[j]),
                            "bound": float(bound20[j]), "margin": float(bound20[j] - lhs20[j]),
                            "inequality": "second-derivative"})
        for eq, lhs, bnd in (("gradient", lhs19, np.broadcast_to(bound19, lhs19.shape)),
                             ("second-derivative", lhs20, bound20)):
            for k in np.flatnonzero(lhs > bnd):
                report.violations.append({"map": i, "spec": spec, "inequality": eq,
                                          "inputs": {"z": _cplx(z[k])}, "computed": float(lhs[k]),
                                          "bound": float(bnd[k]), "excess": float(lhs[k] - bnd[k])})

    # extremal equality |f''(0)| = 3 sqrt(3) / 2 for f(z) = 3 sqrt(3) z^2 / 4 (prenorm exactly 1)
    from .holo import PolynomialMap

    ext = PolynomialMap([[2]], [[SQRT27_HALF / 2]])
    lhs0 = abs(complex(ext.second_derivative(np.zeros(1))))
    gap = abs(lhs0 - SQRT27_HALF)
    if gap > 1e-12:
        report.violations.append({"map": "extremal", "spec": dumps(ext), "inequality": "equality-at-0",
                                  "inputs": {"z": _cplx(0j)}, "computed": lhs0,
                                  "bound": SQRT27_HALF, "excess": gap})
    report.statistics = {"max_ratio": max(max19, max20), "bound": 1.0,
                         "margin": 1.0 - max(max19, max20),
                         "max_gradient_ratio": max19, "max_second_derivative_ratio": max20,
                         "extremal_equality_gap": gap, "excluded_critical_points": excluded,
                         "witness": None, "constant": SQRT27_HALF}
    return _finish(report, t0)


# -- distortion theorem ---------------------------------------------------------


def _lower_bound(lam, m, p, r):
    return lam * (m - r) / (m * (1 - m * r) ** p)


def _upper_bound(lam, m, p, r):
    return lam * (m + r) / (m * (1 + m * r) ** p)


def move_det_to(f, lam, start):
    """Find ``a`` on the ray from ``start`` to the rim with ``D_f(a)^n = lam`` (alpha = 1).

    ``start`` should carry density at least ``lam^(1/n)``. Returns ``None`` when
    the ray never gets that low before ``|a| = 0.9999``.
    """
    n = f.n
    start = np.asarray(start, dtype=complex)
    r0 = np.linalg.norm(start)
    direction = start / r0 if r0 > 1e-8 else np.eye(n, dtype=complex)[0]
    end = direction * 0.9999

    def g(t):
        return float(density(f, start + t * (end - start))) ** n - lam

    g0 = g(0.0)
    if g0 < 0:
        # lam = 1 against a start whose density is 1 up to rounding
        return start if g0 > -1e-9 else None
    if g(1.0) > 0:
        return None
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return start + lo * (end - start)


def check_theoremD(lams, alpha=1.0, n=1, samples=1000, seed=0, battery=None, random_maps=3,
                   sup_tol=1e-6, assert_tol=1e-9, prenorm_samples=4096):
    """Check the two-sided distortion bounds and their saturation by the extremal family.

    For ``alpha = 1`` each random map is moved by an automorphism so that its
    Jacobian determinant at the origin reaches every ``lam`` of the grid; for
    other ``alpha`` each map is tested at its own ``|det f'(0)|``.
    """
    t0 = time.perf_counter()
    lams = [float(x) for x in lams]
    if not lams:
        raise ParameterError("lambda grid is empty")
    report = VerificationReport("thmD", {"n": n, "alpha": alpha, "lams": lams, "samples": samples,
                                         "seed": seed, "sup_tol": sup_tol, "assert_tol": assert_tol})
    p = alpha * (n + 1) + 1
    max_sat, min_margin = 0.0, np.inf

    def test_map(g, lam, tag, stream):
        nonlocal min_margin
        m, r_low, r_high = distortion_radii(lam, alpha, n)
        zs = ball_qmc(samples, n, rng_stream(seed, *stream), radius=min(r_low, BALL_GUARD))
        r = np.linalg.norm(zs, axis=1)
        det = g.det_jacobian(zs)
        lo = _lower_bound(lam, m, p, r)
        slack = assert_tol + n * sup_tol * np.abs(lo)
        margin = det.real - (lo - slack)
        min_margin = min(min_margin, float(margin.min()))
        for k in np.flatnonzero(margin < 0):
            report.violations.append({"map": tag, "lam": lam, "inequality": "lower",
                                      "inputs": {"z": _cplx(zs[k])}, "computed": float(det[k].real),
                                      "bound": float(lo[k]), "excess": float(-margin[k])})
        if r_high > 0:
            zs = ball_qmc(samples, n, rng_stream(seed, *stream, 1), radius=r_high)
            r = np.linalg.norm(zs, axis=1)
        else:
            zs, r = np.zeros((1, n), dtype=complex), np.zeros(1)
        det = np.abs(g.det_jacobian(zs))
        up = _upper_bound(lam, m, p, r)
        margin = up + assert_tol + n * sup_tol * np.abs(up) - det
        min_margin = min(min_margin, float(margin.min()))
        for k in np.flatnonzero(margin < 0):
            report.violations.append({"map": tag, "lam": lam, "inequality": "upper",
                                      "inputs": {"z": _cplx(zs[k])}, "computed": float(det[k]),
                                      "bound": float(up[k]), "excess": float(-margin[k])})

    for li, lam in enumerate(lams):
        ext = ExtremalMap.from_lambda(lam, n, alpha)
        m = ext.m
        radii = np.linspace(0.0, m, 10)
        pts = np.zeros((10, n), dtype=complex)
        pts[:, 0] = radii
        det = ext.det_jacobian(pts)
        bound = _lower_bound(lam, m, p, radii)
        sat = np.abs(det - bound)
        max_sat = max(max_sat, float(sat.max()))
        for k in np.flatnonzero(sat > 1e-12):
            report.violations.append({"map": "extremal", "lam": lam, "inequality": "saturation",
                                      "inputs": {"z": _cplx(pts[k])}, "computed": float(det[k].real),
                                      "bound": float(bound[k]), "excess": float(sat[k])})
        test_map(ext, lam, f"extremal(lam={lam!r})", (2, li))

    if battery is None:
        battery = []
        for i in range(random_maps):
            f = random_polynomial(n, 4, rng_stream(seed, 3, i))
            battery.append(normalize(f, alpha, samples=prenorm_samples, seed=seed)[0])
    reached = skipped = 0
    for i, f in enumerate(battery):
        est = prenorm(f, alpha, samples=prenorm_samples, seed=seed)
        _check_normalized(f, est, i)
        if alpha == 1.0:
            for li, lam in enumerate(lams):
                a = move_det_to(f, lam, est.arg.coords)
                if a is None:
                    skipped += 1
                    report.notes.append(f"map {i}: lambda={lam!r} not reached along the ray; skipped")
                    continue
                g = compose(f, MobiusMap(a))
                try:
                    g, lam_g, _ = rotate_to_positive_det(g)
                except DegenerateDeterminant:
                    skipped += 1
                    continue
                reached += 1
                test_map(g, min(lam_g, 1.0), f"map {i} moved to lambda={lam_g!r}", (4, i, li))
        else:
            try:
                g, lam_g, _ = rotate_to_positive_det(f)
            except DegenerateDeterminant:
                skipped += 1
                report.notes.append(f"map {i}: det f'(0) = 0; skipped")
                continue
            reached += 1
            test_map(g, min(lam_g, 1.0), f"map {i} at own lambda={lam_g!r}", (4, i, 0))
    if alpha != 1.0:
        report.notes.append("alpha != 1: random maps tested at their own det f'(0) only")
    report.notes.append("prenorm treated as 1; sup-estimation tolerance added as slack to every bound")
    report.statistics = {"max_ratio": None, "bound": None, "margin": min_margin,
                         "max_saturation_gap": max_sat, "random_cases": reached,
                         "skipped": skipped, "witness": None}
    return _finish(report, t0)


# -- composition operators ------------------------------------------------------


def r_cap(n):
    """Upper limit ``(1/M(n)) ((n+2)/(n+1))^(1/n)`` for the radius parameter ``r``."""
    return ((n + 2.0) / (n + 1.0)) ** (1.0 / n) / constant_M(n)


def k_constant(n, r, eps):
    """Lower-bound constant ``[1 - r M(n) ((n+1)/(n+2))^(1/n)] eps / 2``."""
    if not 0.0 < r < r_cap(n):
        raise ParameterError(f"r = {r!r} outside (0, {r_cap(n)!r})")
    if not eps > 0:
        raise ParameterError("eps must be positive")
    return (1.0 - r * constant_M(n) * ((n + 1.0) / (n + 2.0)) ** (1.0 / n)) * eps / 2.0


def tau(phi, z):
    """``((1-|z|^2)/(1-|phi(z)|^2))^((n+1)/2n) |det phi'(z)|^(1/n)``."""
    z = check_in_ball(z)
    n = phi.n
    w = phi.eval(z)
    ratio = (1.0 - np.sum(np.abs(z) ** 2, axis=-1)) / (1.0 - np.sum(np.abs(w) ** 2, axis=-1))
    return ratio ** ((n + 1) / (2.0 * n)) * np.abs(phi.det_jacobian(z)) ** (1.0 / n)


@dataclass
class Theorem3Hypothesis:
    """Empirical ``(r, eps)`` for which the near-surjectivity hypothesis holds on the scan grid."""

    r: float
    eps: float
    satisfied: bool
    wgrid: np.ndarray = field(repr=False)
    witnesses: np.ndarray = field(repr=False)
    attained: np.ndarray = field(repr=False)
    taus: np.ndarray = field(repr=False)
    exhausted: np.ndarray = field(repr=False)

    def holds_for(self, r, eps):
        return bool(self.satisfied and not self.exhausted.any() and self.r < r and self.eps > eps)

    def worst(self, k=3):
        idx = np.argsort(-self.attained)[:k]
        return [{"w": _cplx(self.wgrid[i]), "z_w": _cplx(self.witnesses[i]),
                 "tanh_beta_root": float(self.attained[i]), "tau": float(self.taus[i])} for i in idx]


def _preimage_guesses(phi, w):
    guesses = [w]
    if isinstance(phi, MobiusMap):
        guesses.insert(0, MobiusMap(phi.a).eval(w))
    elif phi.kind == "composition" and isinstance(phi.inner, MobiusMap) and isinstance(phi.outer, MobiusMap):
        guesses.insert(0, phi.inner.eval(phi.outer.eval(w)))
    return guesses


def hypothesis_scan(phi, wgrid=64, starts=3, maxfev=2000, seed=0, target=1e-14):
    """Search, for each grid point ``w``, a ``z_w`` with ``phi(z_w)`` close to ``w``.

    Closeness is ``tanh(beta(phi(z), w))^(1/n)``; the attained value and
    ``tau(z_w)`` are recorded. The empirical ``(r, eps)`` are the worst attained
    closeness and the smallest ``tau`` over the grid.
    """
    n = phi.n
    rng = rng_stream(seed, 5)
    W = np.concatenate([np.zeros((1, n), dtype=complex), ball_qmc(wgrid - 1, n, rng, radius=0.95)])

    def closeness(z, w):
        return float(pseudo_hyperbolic(phi.eval(z), w)) ** (1.0 / n)

    wit = np.empty_like(W)
    att = np.empty(len(W))
    exhausted = np.zeros(len(W), dtype=bool)
    for i, w in enumerate(W):
        cands = _preimage_guesses(phi, w)
        for _ in range(starts - 1):
            cands.append(w * 0.5 + 0.1 * unit_directions(1, n, rng)[0])
        best_z, best_v = None, np.inf
        for z0 in cands:
            if np.linalg.norm(z0) > 0.999:
                continue
            v = closeness(z0, w)
            if v < best_v:
                best_z, best_v = z0, v
        if best_v > target:
            def obj(x, w=w):
                z = x[:n] + 1j * x[n:]
                if np.linalg.norm(z) > 0.9999:
                    return np.inf
                return closeness(z, w)
            res = minimize(obj, np.concatenate([best_z.real, best_z.imag]), method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-15, "maxfev": maxfev})
            if res.fun < best_v:
                best_z, best_v = res.x[:n] + 1j * res.x[n:], float(res.fun)
            exhausted[i] = res.status == 1 and best_v > 1e-6
        wit[i], att[i] = best_z, best_v
    taus = tau(phi, wit)
    r_emp, eps_emp = float(att.max()), float(taus.min())
    return Theorem3Hypothesis(r_emp, eps_emp, r_emp < r_cap(n), W, wit, att, taus, exhausted)


def check_theorem3(phi, r, eps, battery, seed=0, sup_tol=1e-6, wgrid=64,
                   prenorm_samples=4096):
    """Check ``||f o phi|| >= k(n, r, eps) ||f||`` for every map of ``battery``.

    The report is inapplicable when the scan cannot confirm the hypothesis for
    ``(r, eps)``.
    """
    t0 = time.perf_counter()
    n = phi.n
    report = VerificationReport("thm3", {"n": n, "alpha": 1.0, "r": r, "eps": eps, "seed": seed,
                                         "maps": len(battery), "phi": dumps(phi),
                                         "sup_tol": sup_tol, "wgrid": wgrid})
    k = k_constant(n, r, eps)
    hyp = hypothesis_scan(phi, wgrid=wgrid, seed=seed)
    report.statistics = {"k": k, "empirical_r": hyp.r, "empirical_eps": hyp.eps,
                         "r_cap": r_cap(n), "worst_witnesses": hyp.worst()}
    if not hyp.holds_for(r, eps):
        report.applicable = False
        report.notes.append(f"hypothesis not confirmed on the scan grid: attained r={hyp.r!r}, "
                            f"min tau={hyp.eps!r}")
        return _finish(report, t0)
    min_ratio, witness = np.inf, None
    for i, f in enumerate(battery):
        pf = prenorm(f, samples=prenorm_samples, seed=seed).value
        pc = prenorm(compose(f, phi), samples=prenorm_samples, seed=seed).value
        bound = k * pf * (1 - 2 * sup_tol)
        report.rows.append({"map": i, "spec": dumps(f), "computed": pc, "bound": bound,
                            "margin": pc - bound, "prenorm_f": pf})
        if pc / pf < min_ratio:
            min_ratio, witness = pc / pf, {"map": i}
        if pc < bound:
            report.violations.append({"map": i, "spec": dumps(f), "inputs": {"prenorm_f": pf},
                                      "computed": pc, "bound": bound, "excess": bound - pc})
    report.statistics.update({"max_ratio": None, "min_ratio": min_ratio, "bound": k,
                              "margin": min_ratio - k, "witness": witness})
    return _finish(report, t0)


# -- proof-internal inequalities ------------------------------------------------


def subcase_gap(m, w, n):
    """``|w|^(1/n) - [m^(1/n) - (1-w^2)^((n+1)/2n) (m-w)^(1/n) / (1-mw)^((n+2)/n)]``, nonnegative for ``w <= m``."""
    m, w = np.asarray(m, dtype=float), np.asarray(w, dtype=float)
    lhs = m ** (1 / n) - (1 - w * w) ** ((n + 1) / (2 * n)) * (m - w) ** (1 / n) / (1 - m * w) ** ((n + 2) / n)
    return w ** (1 / n) - lhs


def validity_gap(m, n):
    """``(a0 + m) / (1 + a0 m) - m`` for ``alpha = 1``; nonnegative on ``[0, a0]``."""
    top = a0(1.0, n)
    m = np.asarray(m, dtype=float)
    return (top + m) / (1 + top * m) - m


def check_proof_inequalities(n, grid=100):
    """Evaluate both auxiliary inequalities on a ``grid x grid`` mesh of ``(m, |w|)``."""
    t0 = time.perf_counter()
    report = VerificationReport("proof", {"n": n, "grid": grid, "seed": None})
    top = a0(1.0, n)
    m = np.linspace(0.0, top, grid)
    frac = np.linspace(0.0, 1.0, grid)
    M_, F_ = np.meshgrid(m, frac, indexing="ij")
    W_ = M_ * F_
    g1 = subcase_gap(M_, W_, n)
    mm = np.linspace(0.0, top, grid * grid)
    g2 = validity_gap(mm, n)
    for k in np.flatnonzero(g1.ravel() < -1e-12):
        report.violations.append({"inequality": "subcase", "inputs": {"m": float(M_.flat[k]), "w": float(W_.flat[k])},
                                  "computed": float(g1.flat[k]), "bound": 0.0, "excess": float(-g1.flat[k])})
    for k in np.flatnonzero(g2 < -1e-12):
        report.violations.append({"inequality": "validity-radius", "inputs": {"m": float(mm[k])},
                                  "computed": float(g2[k]), "bound": 0.0, "excess": float(-g2[k])})
    report.statistics = {"max_ratio": None, "bound": 0.0,
                         "margin": float(min(g1.min(), g2.min())),
                         "min_subcase_gap": float(g1.min()), "min_validity_gap": float(g2.min()),
                         "witness": None}
    return _finish(report, t0)


# -- geometry -------------------------------------------------------------------


def check_geometry(n, pairs=100, seed=0, rel_tol=1e-8, geodesic_pairs=0, geodesic_tol=1e-4,
                   quad=QuadratureSpec()):
    """Compare quadrature lengths of pulled-back radii (and optionally minimized splines) with the closed form."""
    t0 = time.perf_counter()
    report = VerificationReport("geometry", {"n": n, "pairs": pairs, "seed": seed, "rel_tol": rel_tol,
                                             "geodesic_pairs": geodesic_pairs,
                                             "geodesic_tol": geodesic_tol})
    rng = rng_stream(seed, 6)
    Z, W = ball_qmc(pairs, n, rng, radius=0.95), ball_qmc(pairs, n, rng, radius=0.95)
    worst, witness = 0.0, None
    for i, (z, w) in enumerate(zip(Z, W)):
        d = float(bergman_distance(z, w))
        length = curve_length(radial_geodesic(z, w), quad)
        rel = abs(length - d) / d
        report.rows.append({"pair": i, "z": _cplx(z), "w": _cplx(w), "computed": length,
                            "bound": d, "margin": rel_tol - rel})
        if rel > worst:
            worst, witness = rel, {"z": _cplx(z), "w": _cplx(w)}
        if rel > rel_tol:
            report.violations.append({"inequality": "radial-length", "inputs": {"z": _cplx(z), "w": _cplx(w)},
                                      "computed": length, "bound": d, "excess": rel - rel_tol})
    gworst = 0.0
    for i in range(geodesic_pairs):
        z, w = Z[i] * 0.9, W[i] * 0.9
        d = float(bergman_distance(z, w))
        res = geodesic_infimum(z, w)
        rel = (res.length - d) / d
        gworst = max(gworst, abs(rel))
        if rel > geodesic_tol or rel < -1e-9:
            report.violations.append({"inequality": "geodesic-infimum",
                                      "inputs": {"z": _cplx(z), "w": _cplx(w)}, "computed": res.length,
                                      "bound": d, "excess": abs(rel)})
    report.statistics = {"max_ratio": worst, "bound": rel_tol, "margin": rel_tol - worst,
                         "witness": witness, "geodesic_max_rel_gap": gworst}
    return _finish(report, t0)
