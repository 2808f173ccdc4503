import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize_scalar

from conftest import ball_points
from bergball.ball_geometry import mobius
from bergball.bloch import (BlochParams, LemmaCProfile, a0, constant_M, density,
                            lambda_of_m, lemma_c_profile, m_root, normalize, prenorm,
                            theoremD_bounds)
from bergball.errors import ParameterError
from bergball.holo import (MobiusMap, PolynomialMap, compose, extremal_map, identity,
                           random_polynomial)

POLY = random_polynomial(2, 3, np.random.default_rng(21))


def test_constant_M_values():
    assert constant_M(1) == pytest.approx(1.5 * np.sqrt(3), rel=1e-15)
    assert constant_M(1) == pytest.approx(2.5980762, abs=1e-7)
    assert constant_M(1) < 3.31
    assert constant_M(2) == pytest.approx(4 ** 0.25 * (4 / 3) ** 0.75, rel=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_density_of_identity(n):
    z = np.full(n, 0.3 + 0.1j) / np.sqrt(n)
    r2 = np.vdot(z, z).real
    assert density(identity(n), z) == pytest.approx((1 - r2) ** ((n + 1) / (2 * n)))


@given(ball_points(2), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_density_homogeneity(z, c):
    from bergball.holo import scaled

    assert density(scaled(POLY, c), z) == pytest.approx(abs(c) * density(POLY, z), rel=1e-10)


@given(ball_points(2, 0.9), ball_points(2, 0.9))
def test_density_automorphism_invariance(a, z):
    g = compose(POLY, MobiusMap(a))
    assert density(g, z) == pytest.approx(density(POLY, mobius(a, z)), rel=1e-10, abs=1e-300)


def test_prenorm_known_values():
    est = prenorm(identity(2))
    assert est.value == pytest.approx(1.0, abs=1e-12)
    assert density(identity(2), est.arg) == est.value
    # sup of 2 t (1 - t^2) is 4 / (3 sqrt 3) at t = 1/sqrt 3
    sq = PolynomialMap([[2]], [[1.0]])
    assert prenorm(sq).value == pytest.approx(4 / (3 * np.sqrt(3)), rel=1e-12)


def test_prenorm_is_a_lower_certificate_and_deterministic():
    f = random_polynomial(1, 4, np.random.default_rng(3))
    est = prenorm(f, seed=11)
    again = prenorm(f, seed=11)
    assert est.value == again.value
    assert np.array_equal(est.arg.coords, again.arg.coords)
    # dense radial/angle grid never beats the certified value by more than rounding
    r = np.linspace(0, 0.999, 600)
    t = np.linspace(0, 2 * np.pi, 600, endpoint=False)
    grid = (r[:, None] * np.exp(1j * t[None, :])).reshape(-1, 1)
    assert density(f, grid).max() <= est.value * (1 + 1e-9)


def test_prenorm_automorphism_invariance():
    f, _ = normalize(random_polynomial(2, 4, np.random.default_rng(8)))
    for a in ([0.3, 0.2j], [-0.5, 0.4]):
        g = compose(f, MobiusMap(a))
        assert prenorm(g).value == pytest.approx(1.0, abs=2e-6)


def test_normalize():
    f = random_polynomial(3, 2, np.random.default_rng(9))
    g, est = normalize(f)
    assert prenorm(g).value == pytest.approx(1.0, abs=1e-9)
    assert est.value > 0


def test_bloch_params_validation():
    with pytest.raises(ParameterError):
        BlochParams(0)
    with pytest.raises(ParameterError):
        BlochParams(1, alpha=0.0)


@pytest.mark.parametrize("alpha", [1.0, 2.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_profile_unimodal_with_unit_peak(alpha, n):
    p = LemmaCProfile(alpha, n)
    top = p.a0
    assert p(top) == pytest.approx(1.0, rel=1e-14)
    up = p(np.linspace(0, top, 10_000))
    down = p(np.linspace(top, 1, 10_000)[1:])
    assert np.all(np.diff(up) > 0)
    assert np.all(np.diff(down) < 0)
    # the peak found by a generic optimizer is the closed-form a0
    res = minimize_scalar(lambda x: -p(x), bounds=(0, 1), method="bounded", options={"xatol": 1e-12})
    assert res.x == pytest.approx(top, abs=1e-6)


def test_profile_domain():
    with pytest.raises(ParameterError):
        lemma_c_profile(1.1)
    assert lemma_c_profile(0.0) == 0.0


@pytest.mark.parametrize("alpha", [1.0, 2.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_m_root_residual_and_oracle(alpha, n):
    top = a0(alpha, n)
    for lam in np.linspace(0.01, 1.0, 25):
        m = m_root(lam, alpha, n)
        assert abs(lemma_c_profile(m, alpha, n) - lam) <= 1e-13
        if lam < 1:
            ref = brentq(lambda x: lemma_c_profile(x, alpha, n) - lam, 0, top, xtol=1e-15)
            assert m == pytest.approx(ref, abs=1e-12)


def test_m_root_examples_and_errors():
    assert m_root(1.0) == a0(1, 1)
    assert m_root(1e-9) < 1e-8
    lams = np.linspace(0.05, 1, 40)
    ms = [m_root(x, 1.0, 2) for x in lams]
    assert np.all(np.diff(ms) > 0)
    for bad in (0.0, -0.1, 1.01):
        with pytest.raises(ParameterError):
            m_root(bad)


def test_lambda_of_m():
    assert lambda_of_m(a0(1, 2), 2) == pytest.approx(1.0, rel=1e-14)
    assert lambda_of_m(0.2, 1) == pytest.approx(1.5 * np.sqrt(3) * 0.2 * 0.96, rel=1e-14)
    assert lambda_of_m(0.2, 1) == pytest.approx(0.498831, abs=1e-6)
    for n in (1, 2, 3):
        for lam in np.linspace(0.1, 1.0, 10):
            assert lambda_of_m(m_root(lam, 1.0, n), n) == pytest.approx(lam, abs=1e-12)
    with pytest.raises(ParameterError):
        lambda_of_m(0.7, 1)


def test_lambda_of_m_keeps_extremal_normalized():
    # the determinant at 0 must make the extremal prenorm exactly one in every dimension
    for n in (2, 3):
        f = extremal_map(0.8 * a0(1, n), n)
        assert prenorm(f).value == pytest.approx(1.0, abs=1e-9)


def test_theoremD_bounds_examples():
    b = theoremD_bounds(0.5, 0.0)
    assert b.lower == pytest.approx(0.5) and b.upper == pytest.approx(0.5)
    top = theoremD_bounds(1.0, 0.0, n=2)
    assert top.r_high == pytest.approx(0.0, abs=1e-15)
    assert top.lower == pytest.approx(1.0) and top.upper == pytest.approx(1.0)
    assert theoremD_bounds(1.0, 0.1, n=2).upper is None
    far = theoremD_bounds(0.5, 0.99)
    assert far.lower is None
    with pytest.raises(ParameterError):
        theoremD_bounds(1.5, 0.1)


@pytest.mark.parametrize("n", [1, 2])
def test_extremal_saturates_lower_bound(n):
    for lam in (0.25, 0.5, 0.75, 1.0):
        b0 = theoremD_bounds(lam, 0.0, n=n)
        f = extremal_map(b0.m, n)
        for t in (0.0, b0.m / 2, b0.m):
            z = np.zeros(n)
            z[0] = t
            assert complex(f.det_jacobian(z)).real == pytest.approx(
                theoremD_bounds(lam, t, n=n).lower, abs=1e-12)
