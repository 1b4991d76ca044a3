import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otbounds import bounds as B
from otbounds.errors import ConditionViolated, HypothesisViolation
from otbounds.hypotheses import CurvatureConstants, GrowthConstants, RatioConstants, m0_value
from otbounds.potentials import Potential

CAUCHY = Potential(1, "power", math.pi, 2.0)


# ------------------------------------------------------------ cone mass
@pytest.mark.parametrize("d,expected", [(1, 0.5), (2, 1 / 3), (3, 0.25)])
def test_cone_fraction_exact(d, expected):
    assert B.cone_fraction(d) == pytest.approx(expected, abs=1e-15)


def test_cone_fraction_matches_cap_area():
    # spherical cap of half-angle 60 degrees in S^{d-1}, by direct 1-D integration
    from scipy.integrate import quad
    for d in (4, 5, 7):
        num = quad(lambda t: math.sin(t) ** (d - 2), 0, math.pi / 3)[0]
        den = quad(lambda t: math.sin(t) ** (d - 2), 0, math.pi)[0]
        assert B.cone_fraction(d) == pytest.approx(num / den, rel=1e-10)


def test_cone_mass_radial_targets():
    assert B.cone_mass(CAUCHY) == pytest.approx(0.5, abs=1e-10)
    assert B.cone_mass(Potential(2, "gaussian-exp")) == pytest.approx(1 / 3, abs=1e-9)
    assert B.cone_mass(Potential(3, "power", 1.0, 2.0), truncated=True) == pytest.approx(0.25)


def test_cone_mass_custom_planar_matches_radial():
    W = Potential(2, "custom-composite", math.sqrt(math.pi), expression="1 + x0**2 + x1**2")
    assert B.cone_mass(W, n_directions=4) == pytest.approx(1 / 3, rel=1e-6)


def test_cone_mass_asymmetric_line_target():
    # shifted Cauchy: the lighter side is the half-line mass 1/2 - arctan(1)/pi
    W = Potential(1, "custom-composite", math.pi, expression="1 + (x0 - 1)**2")
    assert B.cone_mass(W) == pytest.approx(0.5 - math.atan(1.0) / math.pi, abs=1e-9)


# ------------------------------------------------------------ xstar bound
def test_xstar_cauchy_half():
    # tail mass >= 1/2 iff arctan r <= pi/4, so the sup is r = 1
    assert B.xstar_bound(CAUCHY, 0.5) == pytest.approx(2.0, rel=1e-10)


def test_xstar_cauchy_quarter():
    assert B.xstar_bound(CAUCHY, 0.25) == pytest.approx(2 * math.tan(3 * math.pi / 8), rel=1e-10)


def test_xstar_radial_direction_free():
    f = Potential(2, "power", math.sqrt(math.pi), 2.0)
    a = B.cone_mass(f)
    # tail of <x>^{-4}/pi outside B_r is 1/(1+r^2)
    assert B.xstar_bound(f, a) == pytest.approx(2 * math.sqrt(1 / a - 1), rel=1e-9)


@given(a1=st.floats(0.02, 0.95), a2=st.floats(0.02, 0.95))
def test_xstar_nonincreasing_in_a_g(a1, a2):
    lo, hi = sorted((a1, a2))
    assert B.xstar_bound(CAUCHY, hi) <= B.xstar_bound(CAUCHY, lo) + 1e-12


def test_xstar_rejects_bad_a_g():
    with pytest.raises(ValueError):
        B.xstar_bound(CAUCHY, 1.0)


# ------------------------------------------------------------ formulas
def test_m0_worked_example():
    assert m0_value(3.0, 0.8, 1.0, 2.0, 1.0) == pytest.approx(5.0, abs=1e-14)


def test_linear_certificate_worked_example():
    cert = B.linear_growth_certificate(GrowthConstants(2.0, 3.0, 0.8, 1.0, "closed-form"), 1.0, 0.5, 0.0)
    assert cert.M0 == pytest.approx(5.0, abs=1e-14)
    assert cert.C == pytest.approx(5.0, abs=1e-14)


def test_m0_large_delta_limit():
    assert m0_value(3.0, 1e12, 1.0, 2.0, 1.0) == pytest.approx(4.5)


def test_linear_constant_dominates_affine_bound():
    cert = B.linear_growth_certificate(GrowthConstants(2.0, 1.5, 0.3, 0.7, "x"), 2.0, 1 / 3, 3.0)
    r = np.linspace(0, 1e3, 10001)
    affine = math.sqrt(2 * cert.M0) + cert.M0 * cert.xstar_bound + cert.M0 * r
    assert np.all(affine <= cert.C * (1 + r) * (1 + 1e-14))


def test_lipschitz_worked_examples():
    K = B.lipschitz_certificate(RatioConstants(1.0, 2.0, "x"), CurvatureConstants(1.0, 0.0, "x"), 3.0).K
    assert K == pytest.approx(16.0, abs=1e-14)
    K1 = B.lipschitz_certificate(RatioConstants(1.0, 1.0, "x"), CurvatureConstants(2.0, 0.0, "x"), 0.0).K
    assert K1 == pytest.approx(1.0, abs=1e-15)


def test_lipschitz_linear_in_A():
    cc = CurvatureConstants(0.7, 1.3, "x")
    k1 = B.lipschitz_certificate(RatioConstants(1.1, 2.0, "x"), cc, 4.0).K
    k2 = B.lipschitz_certificate(RatioConstants(2.2, 2.0, "x"), cc, 4.0).K
    assert k2 == pytest.approx(2 * k1, rel=1e-15)


def test_lipschitz_rejects_nonpositive_lambda():
    with pytest.raises(HypothesisViolation):
        B.lipschitz_certificate(RatioConstants(1, 1, "x"), CurvatureConstants(0.0, 1.0, "x"), 1.0)


positive = st.floats(0.05, 20.0)


@given(R0=positive, d0=positive, C0=positive, lip=positive, p=st.floats(1.1, 4.0), bump=st.floats(1.0, 3.0))
def test_m0_monotone(R0, d0, C0, lip, p, bump):
    base = m0_value(R0, d0, C0, p, lip)
    assert m0_value(R0, d0 * bump, C0, p, lip) <= base * (1 + 1e-12)
    assert m0_value(R0, d0, C0 * bump, p, lip) <= base * (1 + 1e-12)
    assert m0_value(R0 * bump, d0, C0, p, lip) >= base * (1 - 1e-12)
    assert m0_value(R0, d0, C0, p, lip * bump) >= base * (1 - 1e-12)


@given(A=positive, Bc=positive, lam=positive, Lam=st.floats(0.0, 20.0), C=st.floats(0.0, 50.0),
       bump=st.floats(1.0, 3.0))
def test_K_monotone(A, Bc, lam, Lam, C, bump):
    def K(A=A, Bc=Bc, lam=lam, Lam=Lam, C=C):
        return B.lipschitz_certificate(RatioConstants(A, Bc, "x"), CurvatureConstants(lam, Lam, "x"), C).K
    base = K()
    tol = 1 + 1e-12
    assert K(A=A * bump) * tol >= base
    assert K(Bc=Bc * bump) * tol >= base
    assert K(Lam=Lam * bump + (bump - 1)) * tol >= base
    assert K(C=C * bump) * tol >= base
    assert K(lam=lam * bump) <= base * tol


# ------------------------------------------------------------ order-only certificates
def test_sublinear_worked_example():
    c = B.sublinear_certificate(2, 2.0, 3.0)
    assert c.alpha == 2.0 and c.theta == pytest.approx(4 / 3) and c.condition_ok
    assert c.theta < 2


def test_sublinear_equal_exponents_is_linear():
    assert B.sublinear_certificate(3, 2.5, 2.5).alpha == 1.0


def test_sublinear_condition_violated():
    with pytest.raises(ConditionViolated):
        B.sublinear_certificate(1, 1.1, 3.0)


def test_gaussian_envelope_values():
    c = B.gaussian_certificate(2.0)
    assert c.envelope(0.0) == 1.0
    assert c.envelope(math.e - 1) == pytest.approx(math.sqrt(2), rel=1e-15)
    r = np.geomspace(1e-3, 1e6, 500)
    assert np.all(np.diff(c.envelope(r)) > 0)


def test_calibration_includes_outermost_radius():
    c = B.gaussian_certificate(1.0)
    radii = np.geomspace(10, 1000, 9)
    ratios = np.linspace(1.0, 2.0, 9)
    cal = B.calibrate(c, radii, ratios)
    assert cal.C == 2.0
    assert cal.calibration["n_fit"] == 5 and cal.calibration["n_held_out"] == 4


# ------------------------------------------------------------ serialization
def test_certificates_round_trip():
    gc = GrowthConstants(2.0, 3.0, 0.8, 1.0, "closed-form")
    certs = [B.linear_growth_certificate(gc, 1.0, 0.5, 2.0),
             B.lipschitz_certificate(RatioConstants(1, 2, "x"), CurvatureConstants(1, 0, "x"), 3.0),
             B.calibrate(B.sublinear_certificate(2, 2.0, 3.0), [1, 2, 3], [0.5, 0.6, 0.7]),
             B.gaussian_certificate(3.5)]
    for c in certs:
        doc = json.loads(json.dumps(c.to_dict()))
        assert {"formula", "inputs", "value"} <= set(doc)
        back = B.certificate_from_dict(doc)
        assert back.to_dict() == c.to_dict()
