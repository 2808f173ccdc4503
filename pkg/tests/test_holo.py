import numpy as np
import pytest
from hypothesis import given
from scipy.integrate import quad
from scipy.optimize import brentq

from conftest import ball_points
from bergball.bloch import a0, lambda_of_m, prenorm
from bergball.errors import (DegenerateDeterminant, DimensionError, DomainError,
                             ParameterError, RangeViolation)
from bergball.holo import (Composition, DiagonalStack, ExtremalMap, MobiusMap,
                           PolynomialMap, Rotation, compose, extremal_map, identity,
                           oracle_jacobian, random_polynomial, rotate_to_positive_det,
                           scaled)
from bergball.mapfile import MapParseError, dumps, load_file, loads
from bergball.sampling import ball_qmc, rng_stream


def _maps_of_every_kind():
    rng = np.random.default_rng(7)
    poly = random_polynomial(2, 4, rng)
    half = PolynomialMap([[1, 0], [0, 1]], [[0.5, 0], [0, 0.5]])
    return {
        "polynomial": poly,
        "extremal": extremal_map(0.3, 2),
        "automorphism": MobiusMap([0.3 + 0.2j, -0.4]),
        "composition": compose(poly, MobiusMap([0.2j, 0.5])),
        "composition-nonauto": compose(poly, half),
        "diagonal-stack": DiagonalStack([extremal_map(0.2, 1), random_polynomial(1, 3, rng)]),
        "scalar-rotation": Rotation(poly, np.exp(0.7j), row=1),
    }


@pytest.mark.parametrize("kind", list(_maps_of_every_kind()))
def test_jacobian_matches_contour_oracle(kind):
    f = _maps_of_every_kind()[kind]
    for z in ball_qmc(20, f.n, rng_stream(3), radius=0.95):
        J = f.jacobian(z)
        err = np.linalg.norm(J - oracle_jacobian(f, z)) / np.linalg.norm(J)
        assert err <= 1e-10


def test_contour_and_central_oracles_agree():
    f = random_polynomial(2, 3, np.random.default_rng(1))
    z = np.array([0.2 + 0.1j, -0.3j])
    a = oracle_jacobian(f, z)
    b = oracle_jacobian(f, z, h=1e-6, method="central")
    assert np.allclose(a, b, rtol=1e-7, atol=1e-8)


def test_oracle_step_validation():
    f = identity(1)
    with pytest.raises(ParameterError):
        oracle_jacobian(f, np.array([0.1]), h=0.5)
    with pytest.raises(DomainError):
        oracle_jacobian(f, np.array([0.99995]), h=1e-4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_extremal_first_component_against_quadrature(n):
    f = extremal_map(0.7 * a0(1, n), n)
    for t in (0.1, -0.6, 0.9):
        re, _ = quad(lambda s: f.first_derivative(s).real, 0, t, epsabs=1e-13, epsrel=1e-12, limit=200)
        assert f.first_component(t) == pytest.approx(re, rel=1e-11, abs=1e-14)


def test_extremal_alpha_two_uses_log_branch():
    # p = alpha (n+1) + 1 == 2 for alpha = 1/2, n = 1
    f = ExtremalMap(0.3, 1, alpha=0.5)
    ref, _ = quad(lambda s: f.first_derivative(s).real, 0, 0.8, epsabs=1e-14, epsrel=1e-14)
    assert f.first_component(0.8) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_extremal_is_normalized(n):
    m = 0.6 * a0(1, n)
    f = extremal_map(m, n)
    assert complex(f.det_jacobian(np.zeros(n))) == pytest.approx(lambda_of_m(m, n), rel=1e-14)
    assert prenorm(f).value == pytest.approx(1.0, abs=1e-9)


def test_extremal_parameter_range():
    with pytest.raises(ParameterError):
        extremal_map(0.7, 1)
    with pytest.raises(ParameterError):
        extremal_map(0.0, 1)
    f = ExtremalMap.from_lambda(0.5, 1)
    assert f.lam == 0.5
    # independent root of (3 sqrt 3 / 2) x (1 - x^2) = 1/2
    ref = brentq(lambda x: 1.5 * np.sqrt(3) * x * (1 - x * x) - 0.5, 0, a0(1, 1), xtol=1e-15)
    assert f.m == pytest.approx(ref, abs=1e-12)


@given(ball_points(1, 0.9))
def test_second_derivative_against_difference_quotient(z):
    h = 1e-5
    for f in (random_polynomial(1, 4, np.random.default_rng(2)), extremal_map(0.3, 1),
              MobiusMap([0.4 - 0.2j]), compose(extremal_map(0.2, 1), MobiusMap([0.5j]))):
        d2 = complex(f.second_derivative(z))
        fd = (f.jacobian(z + h)[0, 0] - f.jacobian(z - h)[0, 0]) / (2 * h)
        assert abs(d2 - fd) <= 1e-6 * max(1.0, abs(d2))


def test_second_derivative_requires_disk():
    with pytest.raises(DimensionError):
        identity(2).second_derivative(np.zeros(2))


def test_composition_range_and_domain_checks():
    double = PolynomialMap([[1]], [[2.0]])
    with pytest.raises(RangeViolation) as info:
        compose(identity(1), double)
    assert abs(2 * info.value.witness[0]) >= 1
    unchecked = Composition(identity(1), double, check=False)
    with pytest.raises(DomainError, match="child 1"):
        unchecked.eval(np.array([0.9]))
    with pytest.raises(DimensionError):
        compose(identity(2), identity(1))


def test_composition_with_automorphism_moves_origin():
    a = np.array([0.3, 0.1j])
    f = random_polynomial(2, 3, np.random.default_rng(4))
    g = compose(f, MobiusMap(a))
    assert np.allclose(g.eval(np.zeros(2)), f.eval(a))


def test_rotate_to_positive_det():
    f = random_polynomial(2, 3, np.random.default_rng(5))
    g, lam, theta = rotate_to_positive_det(f)
    d = complex(g.det_jacobian(np.zeros(2)))
    assert d.real == pytest.approx(lam, rel=1e-13)
    assert abs(d.imag) <= 1e-13 * lam
    assert complex(f.det_jacobian(np.zeros(2))) == pytest.approx(lam * np.exp(1j * theta))
    with pytest.raises(DegenerateDeterminant):
        rotate_to_positive_det(PolynomialMap([[2]], [[1.0]]))


def test_scaled_polynomial_and_generic():
    f = random_polynomial(2, 2, np.random.default_rng(6))
    z = np.array([0.1, 0.2j])
    assert np.allclose(scaled(f, 2j).eval(z), 2j * f.eval(z))
    g = extremal_map(0.3, 2)
    assert np.allclose(scaled(g, 0.5).jacobian(z), 0.5 * g.jacobian(z))


def test_identity_and_dimension_mismatch():
    f = identity(3)
    z = np.array([0.1, 0.2, 0.3j])
    assert np.allclose(f.eval(z), z)
    with pytest.raises(DimensionError):
        f.eval(np.zeros(2))


# -- map files -----------------------------------------------------------------


@pytest.mark.parametrize("kind", list(_maps_of_every_kind()))
def test_mapfile_round_trip(kind):
    f = _maps_of_every_kind()[kind]
    (g,) = loads(dumps(f))
    assert g.kind == f.kind
    assert dumps(g) == dumps(f)
    z = ball_qmc(5, f.n, rng_stream(9), radius=0.9)
    assert np.allclose(g.eval(z), f.eval(z), rtol=1e-14)


def test_mapfile_extremal_entry(tmp_path):
    path = tmp_path / "maps.txt"
    path.write_text("# extremal\nextremal(m=0.2, n=1)\n")
    (f,) = load_file(path)
    assert isinstance(f, ExtremalMap)
    assert f.m == 0.2 and f.n == 1


def test_mapfile_errors(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(MapParseError):
        load_file(empty)
    with pytest.raises(MapParseError, match="2:1"):
        loads("identity(n=1)\nbogus(n=1)")
    with pytest.raises(MapParseError, match="missing parameter"):
        loads("extremal(n=1)")
    with pytest.raises(MapParseError, match=r"1:\d+"):
        loads("identity(n=1")
    with pytest.raises(MapParseError, match="2 children"):
        loads("composition(){identity(n=1)}")
