import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otbounds import hypotheses as H
from otbounds.errors import HypothesisViolation, UnboundedError
from otbounds.potentials import DensityPair, Potential, evaluate
from otbounds.sampling import AsymptoticSample, GridSpec, sphere_directions

SQPI = math.sqrt(math.pi)
GRID = GridSpec()


def as_custom(pot):
    """The same power potential routed through the grid path."""
    assert pot.family == "power" and pot.exponent == 2.0
    expr = "1 + " + " + ".join(f"x{i}**2" for i in range(pot.dimension))
    return Potential(pot.dimension, "custom-composite", pot.coefficient, expression=expr)


# ------------------------------------------------------------------ growth
def test_growth_delta0_at_three():
    gc = H.certify_growth(Potential(1, "power", 1.0, 2.0), r0=3.0)
    assert gc.delta0 == pytest.approx(2 * 9 / 10 - 1, abs=1e-14)
    assert gc.method == "closed-form"


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_growth_C0_is_coefficient(a):
    gc = H.certify_growth(Potential(2, "power", a, 2.0), r0=5.0)
    assert gc.C0 == pytest.approx(a)


def test_growth_linear_exponent_violated():
    with pytest.raises(HypothesisViolation) as info:
        H.certify_growth(Potential(1, "power", 1.0, 1.0))
    assert info.value.quantity == "growth_ratio"


def test_growth_constants_hold_on_grid():
    W = Potential(2, "power", SQPI, 2.0)
    gc = H.certify_growth(W, GRID, p=2.0)
    pts = GRID.refined().points(2)
    r = np.linalg.norm(pts, axis=-1)
    pts = pts[r >= gc.R0]
    v, g = W.value(pts), W.gradient(pts)
    assert np.all(np.sum(g * pts, axis=-1) / v >= 1 + gc.delta0 - 1e-12)
    assert np.all(v >= gc.C0 * np.linalg.norm(pts, axis=-1) ** gc.p * (1 - 1e-12))


# --------------------------------------------------------------- lip_root
def test_lip_root_unit_power():
    assert H.lip_root(Potential(2, "power", 1.0, 2.0), 2.0) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("a", [0.25, 2.0, math.pi])
def test_lip_root_scales_with_root_of_coefficient(a):
    assert H.lip_root(Potential(1, "power", a, 2.0), 2.0) == pytest.approx(math.sqrt(a), rel=1e-12)


def test_lip_root_cubic_unbounded():
    with pytest.raises(UnboundedError):
        H.lip_root(Potential(2, "power", 1.0, 3.0), 2.0)


def test_lip_root_closed_form_matches_grid_sup():
    # V = <x>^1.5, p = 2: sup over a fine radial grid of |d/dr V^{1/2}|
    V = Potential(1, "power", 1.0, 1.5)
    r = np.geomspace(1e-3, 1e4, 200001)
    deriv = 0.75 * r * (1 + r**2) ** (0.75 / 2 - 1)
    assert H.lip_root(V, 2.0) == pytest.approx(deriv.max(), rel=1e-6)


# ---------------------------------------------------------------- ratios
def test_ratio_A_cauchy_type_closed_form():
    V = Potential(1, "power", SQPI, 2.0)
    rc = H.certify_ratios(V, V)
    # A^2 = sup (1 + 4 a^2 x^2) / (a^2 (1 + x^2)), the sup being the limit 4
    x = np.geomspace(1e-3, 1e8, 10001)
    a2 = (1 + 4 * math.pi * x**2) / (math.pi * (1 + x**2))
    assert rc.A == pytest.approx(math.sqrt(max(a2.max(), 1 / math.pi)), rel=1e-6)
    assert rc.B == pytest.approx(SQPI, rel=1e-9)      # attained at y = 0


def test_ratio_B_gaussian_finite_on_ball():
    W = Potential(2, "gaussian-exp")
    rc = H.certify_ratios(Potential(2, "power", SQPI, 2.0), W, radius=20.0)
    y = np.linspace(0, 20, 20001)
    v = math.sqrt(2 * math.pi) * np.exp(y**2 / 4)
    b2 = v**2 / ((1 + (y / 2 * v) ** 2) * (1 + y**2))
    assert rc.B == pytest.approx(math.sqrt(b2.max()), rel=1e-6)


def test_ratio_A_at_origin_exceeds_inverse_value():
    V = Potential(2, "power", 0.2, 2.0)
    assert H.certify_ratios(V, V).A >= 1 / 0.2


# ------------------------------------------------------------- curvature
def test_gaussian_lambda_candidate_at_origin():
    W = Potential(1, "gaussian-exp")
    c = math.sqrt(2 * math.pi)
    q = H.point_quantity(W, "curv_lam", np.zeros((1, 1)))[0]
    assert q == pytest.approx(c**2 / 1, rel=1e-12)


def test_power_Lambda_candidate_at_origin():
    a, r = 2.0, 3.0
    V = Potential(1, "power", a, r)
    assert H.point_quantity(V, "curv_Lam", np.zeros((1, 1)))[0] == pytest.approx(a**2 * r, rel=1e-12)
    assert H.certify_curvature(V, Potential(1, "gaussian-exp")).Lam >= a**2 * r * (1 - 1e-12)


def test_affine_target_lambda_violated():
    W = Potential(2, "custom-composite", 1.0, expression="3 + x0")
    with pytest.raises(HypothesisViolation) as info:
        H.certify_curvature(Potential(2, "power", SQPI, 2.0), W, GridSpec(horizon=2.0, n_radii=20))
    assert info.value.quantity == "curv_lam"
    assert info.value.witness is not None


# ------------------------------------------------------------ asymptotic
def test_incremental_ratio_of_quadratic():
    W = Potential(2, "power", 1.0, 2.0)
    z, e, alpha = np.array([5.0, 0.0]), np.array([1.0, 0.0]), 0.1
    h = W.value(z + alpha * e) + W.value(z - alpha * e) - 2 * W.value(z)
    assert h == pytest.approx(2 * alpha**2, abs=1e-12)
    # lam0 candidate times its normalisation recovers the same second difference
    q = H.asymptotic_quantities(W, W, z[None], e[None], alpha)["lam0"][0, 0]
    v, g, _ = evaluate(W, z)
    assert q * alpha**2 * W.value(z) * (1 + g @ g) / v**2 == pytest.approx(h, rel=1e-9)


@pytest.mark.parametrize("pot", [Potential(2, "power", SQPI, 2.0), Potential(2, "power", 1.0, 3.0),
                                 Potential(1, "power", math.pi, 2.0)], ids=["q2d2", "q3d2", "q2d1"])
def test_asymptotic_converges_to_curvature(pot):
    rng = np.random.default_rng(7)
    d = pot.dimension
    z = rng.normal(size=(10, d)) * 8
    e = sphere_directions(d, 8)
    v, g, Hs = [], [], []
    for zi in z:
        a, b, c = evaluate(pot, zi)
        v.append(a), g.append(b), Hs.append(c)
    v, g, Hs = np.array(v), np.array(g), np.array(Hs)
    grad2 = 1 + np.sum(g * g, axis=-1)
    exact = np.einsum("md,ndk,mk->nm", e, Hs, e) * (v / grad2)[:, None]
    # the source side is the second difference of 1/V, which adds a gradient term
    exact_src = exact - 2 * (g @ e.T) ** 2 / grad2[:, None]
    gaps = []
    for alpha in (0.5, 0.1, 0.02):
        q = H.asymptotic_quantities(pot, pot, z, e, alpha)
        gaps.append(max(np.max(np.abs(q["lam0"] - exact) / np.abs(exact)),
                        np.max(np.abs(q["Lam0"] - exact_src) / np.abs(exact))))
    assert gaps[-1] <= 0.05
    assert gaps[0] + 1e-9 >= gaps[1] and gaps[1] + 1e-9 >= gaps[2]


def test_certified_asymptotic_lambda_near_curvature_tail():
    # on power families the asymptotic constants approach the tail of the differential ones
    V = Potential(2, "power", SQPI, 2.0)
    consts = []
    for a0 in (0.5, 0.1, 0.02):
        consts.append(H.certify_asymptotic(V, V, AsymptoticSample(alpha0=a0)))
    lam_tail = H._radial_extremum(V, "curv_lam", "min", lo=10.0, hi=1e3)[0]
    assert consts[-1].lam0 == pytest.approx(lam_tail, rel=0.05)
    assert abs(consts[-1].lam0 - lam_tail) <= abs(consts[0].lam0 - lam_tail) + 1e-9


# ----------------------------------------------------------- pq condition
def test_pq_condition_examples():
    assert H.check_pq_condition(2, 2.0, 3.0)
    assert H.check_pq_condition(1, 2.5, 2.5)
    assert not H.check_pq_condition(1, 1.1, 3.0)


@given(p=st.floats(1.01, 5.0), dq=st.floats(0.0, 5.0), d=st.integers(1, 6))
def test_pq_condition_monotone_in_dimension(p, dq, d):
    q = p + dq
    if H.check_pq_condition(d, p, q):
        assert H.check_pq_condition(d + 1, p, q)


# ----------------------------------------------------------- gauss source
@pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
def test_gauss_source_power_within_bracket(q):
    A = H.certify_gauss_source(Potential(2, "power", 1.0, q))
    assert q / 2 <= A <= 2 * q


def test_gauss_source_constant_is_zero():
    V = Potential(1, "custom-composite", 1.0, expression="2")
    assert H.certify_gauss_source(V, GridSpec(horizon=10.0, n_radii=20)) == 0.0


def test_gauss_source_exponential_violated():
    V = Potential(1, "custom-composite", 1.0, expression="exp(sqrt(1 + x0**2))")
    with pytest.raises(HypothesisViolation):
        H.certify_gauss_source(V, GridSpec(horizon=200.0, n_radii=80))


# ---------------------------------------------- grid vs closed form, refinement
def test_closed_form_and_grid_agree_within_two_percent():
    V = Potential(2, "power", SQPI, 2.0)
    Vc = as_custom(V)
    s = H.DEFAULT_SLACK
    cf, gr = H.certify_curvature(V, V), H.certify_curvature(Vc, Vc)
    assert gr.method == "grid" and cf.method == "profile"
    assert gr.lam * s == pytest.approx(cf.lam, rel=0.02)
    assert gr.Lam / s == pytest.approx(cf.Lam, rel=0.02)
    cr, grr = H.certify_ratios(V, V), H.certify_ratios(Vc, Vc)
    assert grr.A / math.sqrt(s) == pytest.approx(cr.A, rel=0.02)
    assert grr.B / math.sqrt(s) == pytest.approx(cr.B, rel=0.02)


def test_grid_constants_survive_finer_grid():
    Vc = as_custom(Potential(2, "power", SQPI, 2.0))
    rc = H.certify_ratios(Vc, Vc, GRID)
    cc = H.certify_curvature(Vc, Vc, GRID)
    fine = GRID.refined().points(2)
    assert np.nanmax(H.point_quantity(Vc, "ratio_A", fine)) <= rc.A**2
    assert np.nanmax(H.point_quantity(Vc, "ratio_B", fine)) <= rc.B**2
    assert np.nanmin(H.point_quantity(Vc, "curv_lam", fine)) >= cc.lam
    assert np.nanmax(H.point_quantity(Vc, "curv_Lam", fine)) <= cc.Lam


# ------------------------------------------------------------- full systems
def test_system_identity_certified_and_round_trips():
    V = Potential(2, "power", SQPI, 2.0)
    rep = H.certify_system("thm-1.2", DensityPair(V, V))
    assert rep.ok and rep.status == "certified"
    doc = json.loads(json.dumps(rep.to_dict(emit_witness=True)))
    back = H.HypothesisReport.from_dict(doc)
    assert back.to_dict() == rep.to_dict()


def test_system_custom_is_diagnostic():
    V = Potential(2, "power", SQPI, 2.0)
    rep = H.certify_system("thm-3.1", DensityPair(V, as_custom(V)))
    assert rep.status == "diagnostic" and rep.ok


def test_system_affine_target_violated_with_witness():
    V = Potential(2, "power", SQPI, 2.0)
    W = Potential(2, "custom-composite", 1.0, expression="2")
    rep = H.certify_system("thm-3.1", DensityPair(V, W))
    assert rep.status == "violated" and not rep.ok
    assert len(rep.violation["witness"]) == 2


def test_system_sublinear_constants():
    pair = DensityPair(Potential(2, "power", 1.0, 3.0), Potential(2, "power", 1.0, 2.0))
    rep = H.certify_system("thm-2.2", pair, p=3.0, q=2.0)
    assert not rep.ok or rep.constants["sublinear"]["condition_ok"]
