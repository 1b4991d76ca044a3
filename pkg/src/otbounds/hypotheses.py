"""Certification of the hypothesis systems and extraction of their constants.

Radial families are certified from their one-dimensional profile: closed forms
where they exist, otherwise a dense log-radius scan over [0, 1e12] refined by a
bounded scalar optimizer, with the tail slope used to detect divergence.  This
covers all of space, so no slack is applied ("closed-form" / "profile" methods).

Custom potentials are certified on a GridSpec sample.  A grid cannot certify a
global supremum, so grid constants are inflated (or deflated) by ``slack`` and
the result is marked "diagnostic".
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import HypothesisViolation, UnboundedError
from .potentials import Potential
from .sampling import AsymptoticSample, GridSpec

SYSTEMS = ("thm-1.1", "thm-1.2", "thm-2.2", "thm-2.3", "thm-3.1")
DEFAULT_SLACK = 1.05
RADIAL_HORIZON = 1e12
TAIL_SLOPE_TOL = 1e-3


# ------------------------------------------------------------------ records
@dataclass(frozen=True)
class GrowthConstants:
    p: float
    R0: float
    delta0: float
    C0: float
    method: str = "closed-form"


@dataclass(frozen=True)
class RatioConstants:
    A: float
    B: float
    method: str = "profile"


@dataclass(frozen=True)
class CurvatureConstants:
    lam: float
    Lam: float
    method: str = "profile"


@dataclass(frozen=True)
class AsymptoticConstants:
    A0: float
    B0: float
    lam0: float
    Lam0: float
    R0_asym: float
    alpha0: float
    method: str = "sampled"


@dataclass(frozen=True)
class SublinearConstants:
    p: float
    q: float
    A: float
    growth_ratio_liminf: float
    growth_floor: float
    condition_ok: bool
    method: str = "closed-form"


@dataclass(frozen=True)
class PowerBoundConstants:
    """Constants of the power-weighted convexity/concavity system."""

    p: float
    q: float
    lam: float
    Lam: float
    grad_W: float
    grad_V: float
    V_floor: float
    grad_V_inverse: float
    method: str = "profile"


@dataclass
class HypothesisReport:
    system: str
    status: str                        # certified | diagnostic | violated
    constants: dict = field(default_factory=dict)
    witness_grid: dict = field(default_factory=dict)
    violation: Optional[dict] = None
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.status != "violated"

    def to_dict(self, emit_witness=False):
        out = {"system": self.system, "status": self.status,
               "constants": self.constants, "notes": list(self.notes)}
        if self.violation is not None:
            out["violation"] = self.violation
        if emit_witness:
            out["witness_grid"] = self.witness_grid
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(data["system"], data["status"], data.get("constants", {}),
                   data.get("witness_grid", {}), data.get("violation"), data.get("notes", []))


# -------------------------------------------------------- local quantities
def _local_radial(pot, rho):
    """Normalized local data of a radial potential at radii ``rho``."""
    rho = np.asarray(rho, dtype=float)
    j = pot.jet(rho)
    if pot.dimension == 1:
        emin = emax = j.h2
    else:
        emin, emax = np.minimum(j.h2, j.h1), np.maximum(j.h2, j.h1)
    return {"rho": rho, "logv": pot.radial_log_value(rho), "dlog": j.dlog,
            "dot": rho * j.dlog, "emin": emin, "emax": emax}


def _local_points(pot, pts):
    """Same data at explicit points, through value/gradient/Hessian."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = pot.value(pts)
        g = pot.gradient(pts)
        H = pot.hessian(pts)
        bad = ~np.all(np.isfinite(H), axis=(-1, -2))
        eig = np.linalg.eigvalsh(np.where(bad[..., None, None], 0.0, H))
        eig[bad] = np.nan
        return {"rho": np.linalg.norm(pts, axis=-1), "logv": np.log(v),
                "dlog": np.linalg.norm(g, axis=-1) / v, "dot": np.sum(g * pts, axis=-1) / v,
                "emin": eig[..., 0] / v, "emax": eig[..., -1] / v}


def _q(name, L, p=None, q=None):
    """Evaluate a named hypothesis quantity from local data ``L``."""
    rho, logv, dlog = L["rho"], L["logv"], L["dlog"]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        inv2 = np.exp(-2 * logv)
        if name == "growth_ratio":
            return L["dot"]
        if name == "growth_floor":
            return np.exp(logv - p * np.log(rho))
        if name == "lip_root":
            return np.exp(logv / p) * dlog / p
        if name == "ratio_A":
            return (1 + rho**2) * (inv2 + dlog**2)
        if name == "ratio_B":
            return 1.0 / ((1 + rho**2) * (inv2 + dlog**2))
        if name == "curv_lam":
            return L["emin"] / (inv2 + dlog**2)
        if name == "curv_Lam":
            return L["emax"] / (inv2 + dlog**2)
        if name == "gauss_A":
            return (1 + rho) * dlog
        if name == "sub_grad":
            return np.exp(logv - (q - 1) * np.log1p(rho)) * dlog
        if name == "pw_lam":
            return L["emin"] * np.exp(logv - 0.5 * (p - 2) * np.log1p(rho**2))
        if name == "pw_Lam":
            return L["emax"] * np.exp(logv - 0.5 * (q - 2) * np.log1p(rho**2))
        if name == "pw_grad_W":
            return dlog * np.exp(logv + 0.5 * (1 - p) * np.log1p(rho**2))
        if name == "pw_grad_V":
            return dlog * np.exp(logv + 0.5 * (1 - q) * np.log1p(rho**2))
        if name == "pw_V_floor":
            return np.exp(0.5 * q * np.log1p(rho**2) - logv)
        if name == "pw_grad_V_inv":
            return np.exp(0.5 * (q - 1) * np.log1p(rho**2)) / (1 + dlog * np.exp(logv))
    raise KeyError(name)


def radial_quantity(pot, name, rho, p=None, q=None):
    return _q(name, _local_radial(pot, rho), p, q)


def point_quantity(pot, name, pts, p=None, q=None):
    return _q(name, _local_points(pot, np.asarray(pts, dtype=float)), p, q)


def _point_on_axis(d, rho):
    x = np.zeros(d)
    x[0] = rho
    return x


def _radial_extremum(pot, name, sense, lo=0.0, hi=RADIAL_HORIZON, p=None, q=None, system=None):
    """(value, argument) of sup/inf over rho in [lo, hi] of a radial quantity.

    Raises UnboundedError when a sup keeps growing at the top of the range and
    ``hi`` is the open-ended horizon.
    """
    sign = 1.0 if sense == "max" else -1.0

    def f(rho):
        val = radial_quantity(pot, name, np.atleast_1d(rho), p, q)
        return np.where(np.isnan(val), -np.inf * sign, val)

    start = max(lo, 1e-6)
    nodes = np.unique(np.concatenate([[lo], np.geomspace(start, hi, 1500)]))
    vals = sign * f(nodes)
    i = int(np.argmax(vals))
    best, arg = vals[i], nodes[i]
    if 0 < i < len(nodes) - 1 and np.isfinite(best):
        a, b = nodes[i - 1], nodes[i + 1]
        res = optimize.minimize_scalar(lambda t: -sign * f(t)[0], bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-12 * max(1.0, b)})
        if -res.fun > best:
            best, arg = -res.fun, float(res.x)
    open_ended = hi >= RADIAL_HORIZON
    if open_ended:
        top = f(np.array([hi / 100, hi]))
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = float(np.log(np.abs(top[1]) / np.abs(top[0])) / math.log(100))
        if sense == "max" and (not np.isfinite(best) or (i >= len(nodes) - 2 and slope > TAIL_SLOPE_TOL)):
            raise UnboundedError(f"{name} is unbounded (tail exponent {slope:.3g})", system=system,
                                 quantity=name, witness=_point_on_axis(pot.dimension, hi),
                                 value=float(top[1]), trend=slope)
    return float(sign * best), float(arg)


def _grid_extremum(pot, name, sense, grid, lo=0.0, hi=math.inf, p=None, q=None, system=None):
    """Grid version: (value, point); detects divergence along the outer radii."""
    d = pot.dimension
    pts = grid.points(d)
    rho = np.linalg.norm(pts, axis=-1)
    keep = (rho >= lo) & (rho <= hi)
    pts, rho = pts[keep], rho[keep]
    vals = point_quantity(pot, name, pts, p, q)
    vals = np.where(np.isnan(vals), (-np.inf if sense == "max" else np.inf), vals)
    i = int(np.argmax(vals) if sense == "max" else np.argmin(vals))
    if sense == "max" and math.isinf(hi):
        radii = np.unique(rho)
        if len(radii) >= 8:
            outer = rho >= radii[-len(radii) // 8]
            mid = (rho >= radii[-len(radii) // 4]) & ~outer
            if mid.any():
                r_out, r_mid = np.max(rho[outer]), np.max(rho[mid])
                v_out, v_mid = np.max(vals[outer]), np.max(vals[mid])
                if v_out > 0 and v_mid > 0:
                    slope = math.log(v_out / v_mid) / math.log(r_out / r_mid)
                    if slope > 0.05 and rho[i] >= radii[-len(radii) // 8]:
                        raise UnboundedError(f"{name} grows along the grid (tail exponent {slope:.3g})",
                                             system=system, quantity=name, witness=pts[i],
                                             value=float(vals[i]), trend=slope)
    return float(vals[i]), pts[i]


def _extremum(pot, name, sense, grid, lo=0.0, hi=None, p=None, q=None, system=None):
    """Dispatch on family; returns (value, witness point, method)."""
    slack = DEFAULT_SLACK
    if pot.radial:
        val, arg = _radial_extremum(pot, name, sense, lo, RADIAL_HORIZON if hi is None else hi,
                                    p, q, system)
        return val, _point_on_axis(pot.dimension, arg), "profile"
    val, pt = _grid_extremum(pot, name, sense, grid, lo, math.inf if hi is None else hi, p, q, system)
    if sense == "max":
        val = val * slack if val > 0 else val / slack
    else:
        val = val / slack if val > 0 else val * slack
    return val, pt, "grid"


def _violation(msg, system, quantity, pt, value):
    return HypothesisViolation(msg, system=system, quantity=quantity, witness=pt, value=value)


# ------------------------------------------------------------------ growth
def _growth_at(W, R, p, grid, system):
    """(delta0, C0, method) for the radius R."""
    if W.family in ("power", "scaled-power") and W.exponent > 0:
        u2 = (R / W.scale) ** 2
        delta0 = W.exponent * u2 / (1 + u2) - 1
        if p == W.exponent:
            C0 = W.coefficient * W.scale ** (1 - p)
            return delta0, C0, "closed-form"
        if p > W.exponent:
            return delta0, 0.0, "closed-form"
        C0, _ = _radial_extremum(W, "growth_floor", "min", R, RADIAL_HORIZON, p=p, system=system)
        return delta0, C0, "profile"
    if W.family == "gaussian-exp":
        d, s = W.dimension, W.scale
        delta0 = R * R / (d * s * s) - 1
        rstar = max(R, s * math.sqrt(p * d))
        C0 = math.exp(W.radial_log_value(rstar) - p * math.log(rstar))
        return delta0, float(C0), "closed-form"
    dmin, _, _ = _extremum(W, "growth_ratio", "min", grid, lo=R, system=system)
    C0, _, _ = _extremum(W, "growth_floor", "min", grid, lo=R, p=p, system=system)
    return dmin - 1, C0, "grid"


def m0_value(R0, delta0, C0, p, lip):
    """Universal bound max{R0^2/2, (p lip)^{p/(p-1)} / (delta0 C0^{1/(p-1)})}."""
    second = (p * lip) ** (p / (p - 1)) / (delta0 * C0 ** (1 / (p - 1))) if lip > 0 else 0.0
    return max(R0 * R0 / 2, second)


def certify_growth(W, grid=GridSpec(), p=None, r0=None, lip=None, system="thm-1.1"):
    """Growth constants (p, R0, delta0, C0) of the target potential.

    R0 is ``r0`` when given.  Otherwise, among the grid radii where both
    inequalities hold, the one minimizing the resulting M0 when ``lip`` is known,
    else the smallest radius where the ratio clears 1 by the slack margin.
    """
    # liminf of the ratio from the family tail
    if W.family in ("power", "scaled-power"):
        limit = W.exponent
    elif W.family == "gaussian-exp":
        limit = math.inf
    else:
        limit = None
    if limit is not None and limit <= 1:
        raise _violation(f"gradient ratio tends to {limit:g}, no delta0 > 0 exists", system,
                         "growth_ratio", _point_on_axis(W.dimension, grid.horizon), limit)
    if p is None:
        p = W.exponent
    if p <= 1:
        raise ValueError("p must exceed 1")
    if limit is not None and W.family != "gaussian-exp" and W.exponent < p:
        raise _violation(f"W grows like |y|^{W.exponent:g}, slower than |y|^{p:g}", system,
                         "growth_floor", _point_on_axis(W.dimension, grid.horizon), 0.0)

    if r0 is not None:
        candidates = [float(r0)]
    else:
        candidates = [float(r) for r in grid.radii() if r > 0]
    best = None
    for R in candidates:
        delta0, C0, method = _growth_at(W, R, p, grid, system)
        if delta0 <= 0 or C0 <= 0:
            continue
        if r0 is None and lip is None and delta0 < DEFAULT_SLACK - 1:
            continue
        gc = GrowthConstants(float(p), R, float(delta0), float(C0), method)
        if lip is None:
            best = gc
            break
        score = m0_value(R, delta0, C0, p, lip)
        if best is None or score < best[0]:
            best = (score, gc)
    if best is None:
        R = candidates[-1]
        delta0, C0, _ = _growth_at(W, R, p, grid, system)
        raise _violation(f"no R0 gives delta0 > 0 and C0 > 0 (at R={R:g}: delta0={delta0:.3g}, C0={C0:.3g})",
                         system, "growth_ratio", _point_on_axis(W.dimension, R), delta0)
    return best if isinstance(best, GrowthConstants) else best[1]


def lip_root(V, p, grid=GridSpec(), system="thm-1.1"):
    """Lipschitz constant of V^{1/p}: sup |grad V| V^{1/p-1} / p."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    if V.family in ("power", "scaled-power"):
        a, s, r = V.coefficient, V.scale, V.exponent
        k = r / p
        if k > 1:
            raise UnboundedError(f"V^(1/p) grows like |x|^{k:g}", system=system, quantity="lip_root",
                                 witness=_point_on_axis(V.dimension, RADIAL_HORIZON), trend=k - 1)
        if k == 1:
            G = 1.0
        elif k <= 0:
            G = 0.0 if k == 0 else None
        else:
            G = (1 - k) ** -0.5 * ((2 - k) / (1 - k)) ** ((k - 2) / 2)
        if G is not None:
            return (a * s) ** (1 / p) * (k / s) * G if k > 0 else 0.0
    if V.family == "gaussian-exp":
        raise UnboundedError("V^(1/p) grows like exp(|x|^2)", system=system, quantity="lip_root",
                             witness=_point_on_axis(V.dimension, RADIAL_HORIZON), trend=math.inf)
    val, _, _ = _extremum(V, "lip_root", "max", grid, p=p, system=system)
    return max(val, 0.0)


# ------------------------------------------------------- ratio, curvature
def certify_ratios(V, W, grid=GridSpec(), radius=None, system="thm-3.1"):
    """A = sup <x> sqrt(1+|grad V|^2)/V and B = sup W / (<y> sqrt(1+|grad W|^2)).

    ``radius`` restricts the target side to the ball (truncated target).
    """
    a2, _, ma = _extremum(V, "ratio_A", "max", grid, system=system)
    b2, _, mb = _extremum(W, "ratio_B", "max", grid, hi=radius, system=system)
    method = "grid" if "grid" in (ma, mb) else "profile"
    return RatioConstants(math.sqrt(a2), math.sqrt(b2), method)


def certify_curvature(V, W, grid=GridSpec(), radius=None, system="thm-3.1"):
    """lam = inf eig_min(D^2 W) W/(1+|grad W|^2); Lam = sup eig_max(D^2 V) V/(1+|grad V|^2)."""
    lam, pt, ml = _extremum(W, "curv_lam", "min", grid, hi=radius, system=system)
    if not lam > 0:
        raise _violation(f"target convexity constant is {lam:.3g} <= 0", system, "curv_lam", pt, lam)
    Lam, _, mL = _extremum(V, "curv_Lam", "max", grid, system=system)
    method = "grid" if "grid" in (ml, mL) else "profile"
    return CurvatureConstants(float(lam), float(max(Lam, 0.0)), method)


# -------------------------------------------------------------- asymptotic
def _sample_triples(d, sample, r0_asym):
    from .sampling import sphere_directions
    radii = sample.radii() if r0_asym is None else np.geomspace(max(r0_asym, 1e-6), sample.horizon,
                                                                  sample.n_radii)
    dirs = sphere_directions(d, sample.n_directions)
    z = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    return z, dirs, sample.alphas()


def asymptotic_quantities(V, W, z, e, alpha):
    """The four incremental-ratio quantities at points z (n,d), directions e (m,d), step alpha.

    Returns arrays of shape (n, m): A0 and B0 candidates (sup side), Lam0
    candidate (sup side) and lam0 candidate (inf side).
    """
    zp = z[:, None, :] + alpha * e[None, :, :]
    zm = z[:, None, :] - alpha * e[None, :, :]
    zz = np.broadcast_to(z[:, None, :], zp.shape)
    rz = np.linalg.norm(z, axis=-1)[:, None]
    out = {}
    with np.errstate(over="ignore", invalid="ignore"):
        dvp, dvm = V.log_ratio(zz, zp), V.log_ratio(zz, zm)     # log V(z +- a e) - log V(z)
        out["A0"] = np.abs(-np.expm1(-dvp)) / alpha * (1 + rz)
        LV = _local_points(V, z) if not V.radial else _local_radial(V, rz[:, 0])
        normV = (np.exp(-2 * LV["logv"]) + LV["dlog"] ** 2)[:, None]
        second = -(np.expm1(-dvp) + np.expm1(-dvm))
        out["Lam0"] = second / alpha**2 / normV

        dwp, dwm = W.log_ratio(zz, zp), W.log_ratio(zz, zm)
        LW = _local_points(W, z) if not W.radial else _local_radial(W, rz[:, 0])
        normW = (np.exp(-2 * LW["logv"]) + LW["dlog"] ** 2)[:, None]
        out["B0"] = np.abs(np.expm1(dwp)) / alpha / normW / (1 + rz)
        out["lam0"] = (np.expm1(dwp) + np.expm1(dwm)) / alpha**2 / normW
    return out


def certify_asymptotic(V, W, sample=AsymptoticSample(), r0_asym=None, system="thm-3.1"):
    """Smallest (A0, B0, Lam0) and largest lam0 valid at every sampled (z, e, alpha).

    ``r0_asym`` is the asymptotic radius; it defaults to the sample's lower radius
    and is unrelated to the growth R0.
    """
    d = V.dimension
    z, dirs, alphas = _sample_triples(d, sample, r0_asym)
    best = {"A0": -np.inf, "B0": -np.inf, "Lam0": -np.inf, "lam0": np.inf}
    worst_pt = None
    for a in alphas:
        qs = asymptotic_quantities(V, W, z, dirs, a)
        for k in ("A0", "B0", "Lam0"):
            best[k] = max(best[k], float(np.nanmax(qs[k])))
        i = np.unravel_index(np.nanargmin(qs["lam0"]), qs["lam0"].shape)
        if qs["lam0"][i] < best["lam0"]:
            best["lam0"] = float(qs["lam0"][i])
            worst_pt = z[i[0]]
    if not best["lam0"] > 0:
        raise _violation(f"incremental convexity of W fails (lam0 = {best['lam0']:.3g})", system,
                         "lam0", worst_pt, best["lam0"])
    for k in ("A0", "B0"):
        if not np.isfinite(best[k]):
            raise _violation(f"{k} is not finite on the sample", system, k, z[-1], best[k])
    r0a = float(sample.r_lo if r0_asym is None else r0_asym)
    return AsymptoticConstants(best["A0"], best["B0"], best["lam0"], max(best["Lam0"], 0.0),
                               r0a, float(sample.alpha0))


# ---------------------------------------------------------- sublinear, gauss
def check_pq_condition(d, p, q):
    """True iff d (q-1)(p-1) > q - p."""
    if p <= 1 or q <= 1:
        raise ValueError("p and q must exceed 1")
    return d * (q - 1) * (p - 1) > q - p


def certify_gauss_source(V, grid=GridSpec(), system="thm-2.3"):
    """A = sup (1+|x|) |grad V| / V."""
    if V.family == "gaussian-exp":
        raise UnboundedError("(1+|x|)|grad V|/V grows like |x|^2", system=system, quantity="gauss_A",
                             witness=_point_on_axis(V.dimension, RADIAL_HORIZON), trend=2.0)
    val, _, _ = _extremum(V, "gauss_A", "max", grid, system=system)
    return max(val, 0.0)


def certify_sublinear(V, W, grid=GridSpec(), p=None, q=None, system="thm-2.2"):
    """Constants for the sublinear growth system; p defaults to W's exponent, q to V's."""
    p = W.exponent if p is None else p
    q = V.exponent if q is None else q
    d = V.dimension
    # liminf of grad W . y / W must be >= p
    if W.family in ("power", "scaled-power"):
        ratio_lim = W.exponent
        method = "closed-form"
    elif W.family == "gaussian-exp":
        ratio_lim = math.inf
        method = "closed-form"
    else:
        ratio_lim, _, _ = _extremum(W, "growth_ratio", "min", grid, lo=grid.horizon / 10, system=system)
        method = "grid"
    if ratio_lim < p * (1 - 1e-12):
        raise _violation(f"gradient ratio tends to {ratio_lim:g} < p = {p:g}", system, "growth_ratio",
                         _point_on_axis(d, grid.horizon), ratio_lim)
    floor_lo = max(grid.horizon / 10, 1.0)
    floor, pt, _ = _extremum(W, "growth_floor", "min", grid, lo=floor_lo, p=p, system=system)
    if not floor > 0 or (W.radial and W.family != "gaussian-exp" and W.exponent < p):
        raise _violation("W grows slower than |y|^p", system, "growth_floor", pt, floor)
    A1 = certify_gauss_source(V, grid, system)
    A2, _, m2 = _extremum(V, "sub_grad", "max", grid, q=q, system=system)
    if "grid" == m2:
        method = "grid"
    return SublinearConstants(float(p), float(q), float(max(A1, A2)), float(ratio_lim), float(floor),
                              check_pq_condition(d, p, q), method)


def certify_power_bounds(V, W, grid=GridSpec(), p=None, q=None, system="thm-1.2"):
    """Constants of the power-weighted Hessian bounds and the four boundedness conditions."""
    p = W.exponent if p is None else p
    q = V.exponent if q is None else q
    if not p >= q > 1:
        raise _violation(f"need p >= q > 1, got p={p:g}, q={q:g}", system, "exponents",
                         np.zeros(V.dimension), p - q)
    lam, pt, m1 = _extremum(W, "pw_lam", "min", grid, p=p, system=system)
    if not lam > 0:
        raise _violation(f"D^2 W is not bounded below by a positive multiple of <y>^(p-2) ({lam:.3g})",
                         system, "pw_lam", pt, lam)
    Lam, _, m2 = _extremum(V, "pw_Lam", "max", grid, q=q, system=system)
    vals = {}
    methods = {m1, m2}
    for name, pot in (("pw_grad_W", W), ("pw_grad_V", V), ("pw_V_floor", V), ("pw_grad_V_inv", V)):
        vals[name], _, m = _extremum(pot, name, "max", grid, p=p, q=q, system=system)
        methods.add(m)
    return PowerBoundConstants(float(p), float(q), float(lam), float(max(Lam, 0.0)),
                               vals["pw_grad_W"], vals["pw_grad_V"], vals["pw_V_floor"],
                               vals["pw_grad_V_inv"], "grid" if "grid" in methods else "profile")


# ------------------------------------------------------------------ systems
def certify_system(system, pair, grid=GridSpec(), sample=AsymptoticSample(), radius=None,
                   p=None, q=None, r0=None, r0_asym=None):
    """Certify one hypothesis system and collect all constants into a report.

    Violations are reported (status "violated" with a witness), not raised.
    """
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    V, W = pair.source, pair.target
    d = pair.dimension
    consts = {}
    notes = []
    try:
        if system in ("thm-1.1", "thm-1.2", "thm-3.1"):
            pp = W.exponent if p is None else p
            if system == "thm-1.2":
                pb = certify_power_bounds(V, W, grid, p, q, system)
                consts["power_bounds"] = asdict(pb)
                pp = pb.p
            lip = lip_root(V, pp, grid, system)
            gc = certify_growth(W, grid, pp, r0=r0, lip=lip, system=system)
            consts["growth"] = asdict(gc)
            consts["lip_root"] = lip
            if system in ("thm-1.2", "thm-3.1"):
                consts["ratios"] = asdict(certify_ratios(V, W, grid, radius, system))
                consts["curvature"] = asdict(certify_curvature(V, W, grid, radius, system))
                consts["asymptotic"] = asdict(certify_asymptotic(V, W, sample, r0_asym, system))
        elif system == "thm-2.2":
            sc = certify_sublinear(V, W, grid, p, q, system)
            consts["sublinear"] = asdict(sc)
            if not sc.condition_ok:
                raise _violation(f"d(q-1)(p-1) > q-p fails for d={d}, p={sc.p:g}, q={sc.q:g}", system,
                                 "pq_condition", np.zeros(d), d * (sc.q - 1) * (sc.p - 1) - (sc.q - sc.p))
        elif system == "thm-2.3":
            if W.family != "gaussian-exp":
                raise _violation("target is not gaussian-exp", system, "target_family", np.zeros(d), 0.0)
            consts["gauss_A"] = certify_gauss_source(V, grid, system)
    except HypothesisViolation as exc:
        viol = {"quantity": exc.quantity, "message": str(exc), "witness": exc.witness, "value": exc.value}
        if isinstance(exc, UnboundedError):
            viol["trend"] = exc.trend
        return HypothesisReport(system, "violated", consts, _witness(pair, grid, sample), viol, notes)
    methods = _methods(consts)
    if "grid" in methods:
        status = "diagnostic"
        notes.append(f"grid-certified constants carry slack {DEFAULT_SLACK}; liminf conditions are not grid-checkable")
    else:
        status = "certified"
    return HypothesisReport(system, status, consts, _witness(pair, grid, sample), None, notes)


def _methods(consts):
    out = set()
    for v in consts.values():
        if isinstance(v, dict) and "method" in v:
            out.add(v["method"])
    return out


def _witness(pair, grid, sample):
    d = pair.dimension
    return {"grid": grid.describe(d), "asymptotic_sample": sample.describe(d),
            "radial_horizon": RADIAL_HORIZON if pair.radial else None}
