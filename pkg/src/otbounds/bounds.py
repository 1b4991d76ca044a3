"""Explicit bound formulas turned into certificates.

Every certificate records the formula it evaluates, the inputs it was built from
and the resulting value, and round-trips through ``to_dict``/``certificate_from_dict``.
"""
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate, optimize, special

from .errors import ConditionViolated, HypothesisViolation
from .hypotheses import check_pq_condition, m0_value
from .potentials import line_masses, mass, tail_mass
from .sampling import sphere_directions

CONE_COS = 0.5  # cone {y : a.y >= |y|/2}, half-angle 60 degrees


# ------------------------------------------------------------ mass balance
def cone_fraction(d):
    """Fraction of the sphere S^{d-1} inside a 60 degree half-angle cone."""
    if d == 1:
        return 0.5
    return 0.5 * float(special.betainc((d - 1) / 2, 0.5, 1 - CONE_COS**2))


def cone_mass(target, tol=1e-10, n_directions=32, truncated=False):
    """Infimum over directions of the target mass inside the cone around that direction.

    Radial targets use the angular fraction times the total mass (1 when
    ``truncated``, since a truncated target is renormalized on its ball).
    """
    d = target.dimension
    if target.radial:
        total = 1.0 if truncated else mass(target, tol)
        return cone_fraction(d) * total
    if d == 1:
        lower, upper, _ = line_masses(target, tol)
        return min(lower(0.0), upper(0.0))
    if d == 2:
        best = math.inf
        for e in sphere_directions(2, n_directions):
            th = math.atan2(e[1], e[0])

            def integrand(w, phi):
                rho = w / (1 - w)
                y = np.array([[rho * math.cos(phi), rho * math.sin(phi)]])
                return float(target.density(y)[0]) * rho / (1 - w) ** 2

            val, _ = integrate.nquad(integrand, [[0.0, 1.0], [th - math.pi / 3, th + math.pi / 3]],
                                     opts={"epsabs": 0.0, "epsrel": max(tol, 1e-10), "limit": 100})
            best = min(best, val)
        return best
    raise NotImplementedError("cone mass of non-radial targets is available for d <= 2")


def xstar_bound(source, a_g, tol=1e-12):
    """2 sup{r > 0 : mass of the source outside B_r >= a_g}, by bisection in log r."""
    if not 0 < a_g < 1:
        raise ValueError("a_g must lie in (0, 1)")

    def excess(t):
        return tail_mass(source, math.exp(t), tol) - a_g

    if excess(-40.0) < 0:
        return 0.0
    hi = 0.0
    while excess(hi) >= 0:
        hi += 5.0
        if hi > 200:
            raise ValueError("source tail never drops below a_g")
    lo = hi - 5.0
    while excess(lo) < 0 and lo > -40:
        lo -= 5.0
    t = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return 2.0 * math.exp(t)


# ------------------------------------------------------------ certificates
def linear_envelope(r):
    return 1.0 + np.abs(r)


def sqrt_log_envelope(r):
    return np.sqrt(1.0 + np.log1p(np.abs(r)))


@dataclass(frozen=True)
class LinearGrowthCertificate:
    M0: float
    a_g: float
    xstar_bound: float
    C: float
    inputs: dict = field(default_factory=dict)
    kind: str = "growth"
    envelope_kind: str = "power"
    exponent: float = 1.0
    formula: str = ("M0 = max(R0^2/2, (p*lip)^(p/(p-1)) / (delta0*C0^(1/(p-1)))); "
                    "C = max(sqrt(2*M0) + M0*xstar, M0)")

    @property
    def value(self):
        return self.C

    def envelope(self, r):
        return linear_envelope(r)

    def to_dict(self):
        return {"kind": self.kind, "type": "linear-growth", "formula": self.formula,
                "inputs": self.inputs, "value": self.C,
                "derived": {"M0": self.M0, "a_g": self.a_g, "xstar_bound": self.xstar_bound},
                "envelope": {"kind": self.envelope_kind, "exponent": self.exponent}}


@dataclass(frozen=True)
class LipschitzCertificate:
    K: float
    inputs: dict = field(default_factory=dict)
    kind: str = "lipschitz"
    formula: str = "K = sqrt(2*Lam/lam + 4/lam^2) * A * B * (1 + C)"

    @property
    def value(self):
        return self.K

    def to_dict(self):
        return {"kind": self.kind, "type": "lipschitz", "formula": self.formula,
                "inputs": self.inputs, "value": self.K}


@dataclass(frozen=True)
class SublinearCertificate:
    alpha: float
    theta: float
    condition_ok: bool
    C: Optional[float] = None
    inputs: dict = field(default_factory=dict)
    calibration: Optional[dict] = None
    kind: str = "growth"
    envelope_kind: str = "power"
    formula: str = "alpha = (q-1)/(p-1); theta = 2*alpha/(1+alpha); |T(x)| <= C (1+|x|)^alpha"

    @property
    def exponent(self):
        return self.alpha

    @property
    def value(self):
        return self.C

    def envelope(self, r):
        return (1.0 + np.abs(r)) ** self.alpha

    def to_dict(self):
        return {"kind": self.kind, "type": "sublinear-growth", "formula": self.formula,
                "inputs": self.inputs, "value": self.C,
                "derived": {"alpha": self.alpha, "theta": self.theta, "condition_ok": self.condition_ok},
                "calibration": self.calibration,
                "envelope": {"kind": self.envelope_kind, "exponent": self.alpha}}


@dataclass(frozen=True)
class GaussianCertificate:
    A: float
    C: Optional[float] = None
    inputs: dict = field(default_factory=dict)
    calibration: Optional[dict] = None
    kind: str = "growth"
    envelope_kind: str = "sqrt-log"
    formula: str = "|T(x)| <= C sqrt(1 + log(1+|x|))"

    exponent = None

    @property
    def value(self):
        return self.C

    def envelope(self, r):
        return sqrt_log_envelope(r)

    def to_dict(self):
        return {"kind": self.kind, "type": "gaussian-growth", "formula": self.formula,
                "inputs": self.inputs, "value": self.C, "derived": {"A": self.A},
                "calibration": self.calibration,
                "envelope": {"kind": self.envelope_kind, "exponent": None}}


def linear_growth_certificate(gc, lip, a_g, xstar):
    """Growth constant C from the growth hypothesis constants, Lip V^{1/p} and the x* bound."""
    M0 = m0_value(gc.R0, gc.delta0, gc.C0, gc.p, lip)
    C = max(math.sqrt(2 * M0) + M0 * xstar, M0)
    inputs = {"p": gc.p, "R0": gc.R0, "delta0": gc.delta0, "C0": gc.C0, "lip_root": lip,
              "a_g": a_g, "xstar_bound": xstar}
    return LinearGrowthCertificate(M0, a_g, xstar, C, inputs)


def lipschitz_certificate(rc, cc, C):
    """K from ratio constants (A, B), curvature constants (lam, Lam) and the growth constant C."""
    if not cc.lam > 0:
        raise HypothesisViolation(f"lam = {cc.lam:g} is not positive", quantity="curv_lam",
                                  value=cc.lam)
    K = math.sqrt(2 * cc.Lam / cc.lam + 4 / cc.lam**2) * rc.A * rc.B * (1 + C)
    inputs = {"A": rc.A, "B": rc.B, "lam": cc.lam, "Lam": cc.Lam, "C": C}
    return LipschitzCertificate(K, inputs)


def sublinear_certificate(d, p, q):
    """Growth exponent alpha and theta; raises ConditionViolated when d(q-1)(p-1) <= q-p."""
    if not check_pq_condition(d, p, q):
        raise ConditionViolated(f"d(q-1)(p-1) = {d * (q - 1) * (p - 1):g} <= q-p = {q - p:g}")
    alpha = (q - 1) / (p - 1)
    theta = 2 * alpha / (1 + alpha)
    return SublinearCertificate(alpha, theta, True, None, {"d": d, "p": p, "q": q})


def gaussian_certificate(A):
    return GaussianCertificate(float(A), None, {"A": float(A)})


def calibrate(cert, radii, ratios):
    """Freeze the multiplicative constant of an order-only certificate.

    Radii are split alternately into a fit set (always holding the outermost
    radius) and a held-out set; the constant is the max envelope ratio on the
    fit set, and the held-out radii are checked later by ``verify``.
    """
    radii = np.asarray(radii, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    order = np.argsort(radii)
    n = len(order)
    fit = order[(n - 1 - np.arange(n)) % 2 == 0]
    held = order[(n - 1 - np.arange(n)) % 2 == 1]
    C = float(np.max(ratios[fit]))
    cal = {"method": "max envelope ratio on alternate radii", "n_fit": int(len(fit)),
           "n_held_out": int(len(held)),
           "held_out_max": float(np.max(ratios[held])) if len(held) else None}
    return replace(cert, C=C, calibration=cal)


def certificate_from_dict(data):
    t = data["type"]
    if t == "linear-growth":
        der = data["derived"]
        return LinearGrowthCertificate(der["M0"], der["a_g"], der["xstar_bound"], data["value"],
                                       dict(data["inputs"]))
    if t == "lipschitz":
        return LipschitzCertificate(data["value"], dict(data["inputs"]))
    if t == "sublinear-growth":
        der = data["derived"]
        return SublinearCertificate(der["alpha"], der["theta"], der["condition_ok"], data["value"],
                                    dict(data["inputs"]), data.get("calibration"))
    if t == "gaussian-growth":
        return GaussianCertificate(data["derived"]["A"], data["value"], dict(data["inputs"]),
                                   data.get("calibration"))
    raise ValueError(f"unknown certificate type {t!r}")
