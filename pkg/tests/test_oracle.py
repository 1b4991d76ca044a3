import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otbounds import oracle as O
from otbounds.errors import RadiusOutOfRange
from otbounds.potentials import DensityPair, Potential, normalize

SQPI = math.sqrt(math.pi)
CAUCHY = Potential(1, "power", math.pi, 2.0)
CAUCHY2 = Potential(1, "scaled-power", math.pi, 2.0, scale=2.0)


@pytest.fixture(scope="module")
def cauchy_gauss_2d():
    pair = DensityPair(Potential(2, "power", SQPI, 2.0), Potential(2, "gaussian-exp"), normalized=True)
    return pair, O.radial_map(pair, O.default_radial_grid(1e3, 512), tol=1e-12)


# ------------------------------------------------------------ 1-D CDF map
def test_monotone_root_finds_cube_root():
    y = O.monotone_root(lambda s: s**3, lambda s: 3 * s * s, 27.0, 1.0)
    assert y == pytest.approx(3.0, rel=1e-13)


def test_cdf_identity():
    pair = DensityPair(CAUCHY, CAUCHY, normalized=True)
    x = np.array([-10.0, 0.0, 3.0])
    np.testing.assert_allclose(O.cdf_map_1d(pair, x), x, atol=1e-10)


def test_cdf_cauchy_scaling_exact():
    pair = DensityPair(CAUCHY, CAUCHY2, normalized=True)
    x = np.geomspace(1e-2, 1e3, 100)
    np.testing.assert_allclose(O.cdf_map_1d(pair, x), 2 * x, atol=1e-6, rtol=0)
    np.testing.assert_allclose(O.cdf_map_1d(pair, -x), -2 * x, atol=1e-6, rtol=0)


def test_cdf_symmetric_pair_is_odd():
    pair = normalize(DensityPair(Potential(1, "power", 1.0, 3.0), Potential(1, "gaussian-exp")))
    x = np.array([0.5, 2.0, 17.0])
    np.testing.assert_allclose(O.cdf_map_1d(pair, -x), -O.cdf_map_1d(pair, x), atol=1e-10)


def test_cdf_pushforward_on_random_points():
    tol = 1e-10
    pair = normalize(DensityPair(Potential(1, "power", 1.0, 2.5), Potential(1, "gaussian-exp", scale=0.7)))
    F, G = O.cdf_pair_masses(pair, tol)
    rng = np.random.default_rng(3)
    x = rng.standard_cauchy(100) * 3
    T = O.cdf_map_1d(pair, x, tol)
    err = np.abs(np.array([G(t) for t in T]) - np.array([F(v) for v in x]))
    assert err.max() <= 10 * tol


def test_cdf_asymmetric_custom_target():
    # shifted Cauchy target: T(x) = x + 1 exactly
    W = Potential(1, "custom-composite", math.pi, expression="1 + (x0 - 1)**2")
    pair = DensityPair(CAUCHY, W, normalized=True)
    x = np.array([-5.0, 0.0, 0.7, 20.0])
    np.testing.assert_allclose(O.cdf_map_1d(pair, x), x + 1, atol=1e-7)


def test_line_profile_matches_pointwise_map():
    pair = DensityPair(CAUCHY, CAUCHY2, normalized=True)
    prof = O.line_map(pair, horizon=100.0, n_side=64)
    x = np.linspace(-99, 99, 37)
    np.testing.assert_allclose(prof(x), 2 * x, atol=1e-6)
    np.testing.assert_allclose(prof.derivative(x), 2.0, atol=1e-5)
    assert O.ma_residual_1d(pair, prof, x).max() <= 1e-5
    with pytest.raises(RadiusOutOfRange):
        prof(np.array([101.0]))


# ------------------------------------------------------------ radial map
def test_radial_identity():
    V = Potential(3, "power", 1.0, 2.0)
    prof = O.radial_map(DensityPair(V, V), O.default_radial_grid(1e3, 128))
    np.testing.assert_allclose(prof.t, prof.r, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(O.radial_DT_eigs(prof, np.array([0.5, 50.0])), 1.0, rtol=1e-6)


@pytest.mark.parametrize("d,q,s", [(2, 2.0, 3.0), (3, 2.5, 0.5), (1, 3.0, 2.0)])
def test_radial_scaling_family(d, q, s):
    V = Potential(d, "power", 1.0, q)
    W = Potential(d, "scaled-power", 1.0, q, scale=s)
    prof = O.radial_map(DensityPair(V, W), O.default_radial_grid(1e3, 128))
    np.testing.assert_allclose(prof.t, s * prof.r, rtol=1e-8, atol=1e-12)
    rad, tan = O.radial_DT_eigs(prof, np.array([0.0, 1.0, 100.0]))
    np.testing.assert_allclose(rad, s, rtol=1e-6)
    np.testing.assert_allclose(tan, s, rtol=1e-6)
    assert O.ma_residual(DensityPair(V, W), prof, np.array([0.3, 3.0, 300.0])).max() <= 1e-8


def test_radial_map_rotation_invariant():
    V = Potential(2, "power", SQPI, 2.0)
    prof = O.radial_map(DensityPair(V, V), O.default_radial_grid(100.0, 64))
    x = np.array([[3.0, 4.0]])
    th = 0.77
    Q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    np.testing.assert_allclose(prof.map_points(x @ Q.T), prof.map_points(x) @ Q.T, atol=1e-12)
    np.testing.assert_allclose(prof.map_points(x), x, atol=1e-9)


def test_radial_map_d1_matches_cdf_map():
    V = Potential(1, "power", 1.0, 2.5)
    W = Potential(1, "gaussian-exp")
    pair = normalize(DensityPair(V, W))
    prof = O.radial_map(pair, O.default_radial_grid(100.0, 128))
    nodes = prof.r[1::9]
    np.testing.assert_allclose(prof.t[1::9], O.cdf_map_1d(pair, nodes), rtol=1e-9)
    x = np.array([0.01, 0.5, 3.0, 40.0])
    np.testing.assert_allclose(prof(x), O.cdf_map_1d(pair, x), rtol=1e-6)


def test_cauchy_gauss_eigs_match_finite_differences(cauchy_gauss_2d):
    pair, prof = cauchy_gauss_2d
    r, h = 10.0, 1e-3
    t = lambda rr: O.radial_map_point(pair, rr)
    fd = (t(r + h) - t(r - h)) / (2 * h)
    rad, tan = O.radial_DT_eigs(prof, np.array([r]))
    assert rad[0] == pytest.approx(fd, rel=1e-3)
    assert tan[0] == pytest.approx(t(r) / r, rel=1e-9)


def test_cauchy_gauss_ma_residual(cauchy_gauss_2d):
    pair, _ = cauchy_gauss_2d
    prof = O.radial_map(pair, O.default_radial_grid(1e3, 512), tol=1e-8)
    r = np.random.default_rng(11).uniform(0.01, 999.0, 20)
    assert O.ma_residual(pair, prof, r).max() <= 1e-4


def test_cauchy_gauss_profile_shape(cauchy_gauss_2d):
    _, prof = cauchy_gauss_2d
    assert prof.t[0] == 0.0
    assert np.all(np.diff(prof.t) > 0)
    assert prof.ratio(0.0) == pytest.approx(prof.derivative(np.array([1e-6]))[0], rel=1e-4)


def test_profile_monotone_pairs(cauchy_gauss_2d):
    _, prof = cauchy_gauss_2d
    rng = np.random.default_rng(5)
    x = rng.normal(size=(400, 2)) * rng.uniform(0.1, 300, size=(400, 1))
    T = prof.map_points(x)
    i, j = np.triu_indices(len(x), 1)
    assert np.min(np.sum((T[i] - T[j]) * (x[i] - x[j]), axis=-1)) >= -1e-9


@given(r1=st.floats(0.0, 999.0), r2=st.floats(0.0, 999.0))
def test_profile_strictly_increasing(cauchy_gauss_2d, r1, r2):
    _, prof = cauchy_gauss_2d
    if r1 < r2:
        assert prof(np.array([r1]))[0] < prof(np.array([r2]))[0]


def test_profile_csv_round_trip(tmp_path, cauchy_gauss_2d):
    _, prof = cauchy_gauss_2d
    path = tmp_path / "profile.csv"
    prof.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "r,t,t_prime,t_over_r"
    back = O.RadialProfile.from_csv(path, 2)
    np.testing.assert_array_equal(back.t, prof.t)
    np.testing.assert_array_equal(back.slope, prof.slope)


def test_profile_dict_round_trip(cauchy_gauss_2d):
    _, prof = cauchy_gauss_2d
    back = O.profile_from_dict(prof.to_dict())
    r = np.geomspace(1e-3, 1e3, 50)
    np.testing.assert_array_equal(back(r), prof(r))


def test_profile_out_of_range(cauchy_gauss_2d):
    _, prof = cauchy_gauss_2d
    with pytest.raises(RadiusOutOfRange):
        prof(np.array([2e3]))


def test_cauchy_to_normal_closed_form():
    # T(x) = Phi^{-1}(F(x)); for x > 0 the upper tail 1 - F(x) = arctan(1/x)/pi keeps precision
    from scipy.special import ndtri
    pair = DensityPair(CAUCHY, Potential(1, "gaussian-exp"), normalized=True)
    x = np.geomspace(1e-2, 1e3, 40)
    exact = -ndtri(np.arctan(1 / x) / math.pi)
    np.testing.assert_allclose(O.cdf_map_1d(pair, x), exact, rtol=1e-9)
