"""Exact monotone maps: CDF composition in 1-D, mass balance for radial pairs.

The radial map is T(x) = t(|x|) x/|x| where t solves M_f(r) = M_g(t), with M the
mass of the centered ball.  Both profiles are stored as cubic Hermite
interpolants whose node slopes are the exact mass-balance derivatives, limited
(Fritsch-Carlson) so the interpolant stays monotone.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import BracketError, RadiusOutOfRange
from .potentials import line_masses, mass, radial_cumulative, radial_tail, unit_sphere_area

DEFAULT_TOL = 1e-12


# ------------------------------------------------------------ root finding
def monotone_root(phi, dphi, target, s0, step=1.0, width=None, max_expand=200, max_newton=60):
    """Solve phi(s) = target for increasing phi: bracket, bisect, then safeguarded Newton.

    ``width(s)`` is the bracket width at which bisection hands over to Newton
    (default 1e-3 * max(1, |s|)).
    """
    if width is None:
        width = lambda s: 1e-3 * max(1.0, abs(s))
    f0 = phi(s0) - target
    if f0 == 0:
        return s0
    lo = hi = s0
    k = 0
    if f0 < 0:
        while True:
            lo, hi = hi, hi + step
            if phi(hi) - target >= 0:
                break
            step *= 2
            k += 1
            if k > max_expand:
                raise BracketError(f"no upper bracket for target {target:.6g} from {s0:.6g}")
    else:
        while True:
            hi, lo = lo, lo - step
            if phi(lo) - target <= 0:
                break
            step *= 2
            k += 1
            if k > max_expand:
                raise BracketError(f"no lower bracket for target {target:.6g} from {s0:.6g}")
    while hi - lo > width(0.5 * (lo + hi)):
        mid = 0.5 * (lo + hi)
        if phi(mid) - target < 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    for _ in range(max_newton):
        r = phi(s) - target
        if r == 0:
            return s
        if r < 0:
            lo = s
        else:
            hi = s
        der = dphi(s)
        s_new = s - r / der if der > 0 else 0.5 * (lo + hi)
        if not lo < s_new < hi:
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 4e-16 * max(1.0, abs(s)) or hi - lo <= 4e-16 * max(1.0, abs(s)):
            return s_new
        s = s_new
    return s


def _fc_limit(x, y, m):
    """Fritsch-Carlson limiter on node slopes ``m`` of increasing data."""
    m = m.copy()
    h = np.diff(x)
    delta = np.diff(y) / h
    for k in range(len(h)):
        if delta[k] <= 0:
            m[k] = m[k + 1] = 0.0
            continue
        a, b = m[k] / delta[k], m[k + 1] / delta[k]
        s = a * a + b * b
        if s > 9:
            tau = 3 / math.sqrt(s)
            m[k] = tau * a * delta[k]
            m[k + 1] = tau * b * delta[k]
    return m


def _log_shell(pot, t):
    """log of omega_{d-1} t^{d-1} v(t)^{-d}."""
    d = pot.dimension
    lead = math.log(unit_sphere_area(d))
    if d == 1:
        return lead + pot.radial_log_density(t)
    return lead + (d - 1) * math.log(t) + pot.radial_log_density(t)


# ---------------------------------------------------------------- radial
@dataclass
class RadialProfile:
    """Monotone radial profile t(r) on nodes r (r[0] = 0) with slopes t'."""

    r: np.ndarray
    t: np.ndarray
    slope: np.ndarray
    dimension: int

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.t = np.asarray(self.t, dtype=float)
        self.slope = np.asarray(self.slope, dtype=float)
        self._spline = CubicHermiteSpline(self.r, self.t, _fc_limit(self.r, self.t, self.slope))
        self._dspline = self._spline.derivative()

    @property
    def horizon(self):
        return float(self.r[-1])

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.horizon * (1 + 1e-12)):
            raise RadiusOutOfRange(f"radius outside [0, {self.horizon:g}]")
        return r

    def __call__(self, r):
        return self._spline(self._check(r))

    def derivative(self, r):
        return self._dspline(self._check(r))

    def ratio(self, r):
        """t(r)/r, with the limit t'(0) at r = 0."""
        r = self._check(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self._spline(r) / r
        return np.where(r > 0, out, self.slope[0])

    def map_points(self, x):
        """T(x) = t(|x|) x/|x| for points x of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        if self.dimension == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        rho = np.linalg.norm(x, axis=-1)
        return self.ratio(rho)[..., None] * x

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "t", "t_prime", "t_over_r"])
            ratio = self.ratio(self.r)
            for row in zip(self.r, self.t, self.slope, ratio):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, dimension):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2], dimension)

    def to_dict(self):
        return {"kind": "radial", "dimension": self.dimension, "r": self.r.tolist(),
                "t": self.t.tolist(), "slope": self.slope.tolist()}


def default_radial_grid(horizon=1e3, n=512, r_min=1e-3):
    return np.concatenate([[0.0], np.geomspace(r_min, horizon, n - 1)])


class _RadialSolver:
    """Mass-balance solver for one radial pair; masses are taken relative to the totals."""

    def __init__(self, pair, tol):
        self.f, self.g = pair.source, pair.target
        if not (self.f.radial and self.g.radial):
            raise ValueError("radial map needs radial source and target")
        self.d = pair.dimension
        self.tol = tol
        self.mf = mass(self.f, tol)
        self.mg = mass(self.g, tol)

    def source_fractions(self, r):
        """(cumulative fraction, tail fraction) of the source at radius r."""
        return radial_cumulative(self.f, r, self.tol) / self.mf, radial_tail(self.f, r, self.tol) / self.mf

    def solve(self, r, guess=None):
        if r == 0:
            return 0.0
        cum, tail = self.source_fractions(r)
        g, tol, mg = self.g, self.tol, self.mg
        s0 = math.log(guess if guess else r)

        def dlog_mass(s):
            return math.exp(s + _log_shell(g, math.exp(s))) / mg

        if cum <= 0.5:
            phi = lambda s: radial_cumulative(g, math.exp(s), tol) / mg
            s = monotone_root(phi, dlog_mass, cum, s0, step=0.5)
        else:
            phi = lambda s: -radial_tail(g, math.exp(s), tol) / mg
            s = monotone_root(phi, dlog_mass, -tail, s0, step=0.5)
        return math.exp(s)

    def slope(self, r, t):
        """Exact t'(r) = f(r) r^{d-1} / (g(t) t^{d-1}) (mass-normalized)."""
        d = self.d
        if r == 0:
            return math.exp((self.f.radial_log_density(0.0) - math.log(self.mf)
                             - self.g.radial_log_density(0.0) + math.log(self.mg)) / d)
        lf = self.f.radial_log_density(r) - math.log(self.mf)
        lg = self.g.radial_log_density(t) - math.log(self.mg)
        return math.exp(lf - lg + (d - 1) * (math.log(r) - math.log(t)))


def radial_map(pair, r_grid=None, tol=DEFAULT_TOL):
    """Radial profile of the monotone map on ``r_grid`` (default: 512 log nodes up to 1e3)."""
    r_grid = default_radial_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if r_grid[0] != 0:
        r_grid = np.concatenate([[0.0], r_grid])
    solver = _RadialSolver(pair, tol)
    t = np.zeros_like(r_grid)
    slopes = np.zeros_like(r_grid)
    slopes[0] = solver.slope(0.0, 0.0)
    guess = None
    for i in range(1, len(r_grid)):
        r = r_grid[i]
        if guess is None:
            guess = slopes[0] * r
        else:
            # extrapolate with the previous local power law
            guess = t[i - 1] * (r / r_grid[i - 1]) ** (slopes[i - 1] * r_grid[i - 1] / t[i - 1])
        t[i] = solver.solve(r, guess)
        slopes[i] = solver.slope(r, t[i])
        guess = t[i]
    return RadialProfile(r_grid, t, slopes, pair.dimension)


def radial_map_point(pair, r, tol=DEFAULT_TOL):
    """t(r) at a single radius, solved directly (no interpolation)."""
    return _RadialSolver(pair, tol).solve(float(r))


def radial_DT_eigs(profile, r):
    """(radial eigenvalue t'(r), tangential eigenvalue t(r)/r) of DT at radius r."""
    return profile.derivative(r), profile.ratio(r)


def ma_residual(pair, profile, r):
    """|t'(r) (t/r)^{d-1} g(t)/f(r) - 1| with g, f normalized by their masses."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    d = pair.dimension
    lmf = math.log(mass(pair.source))
    lmg = math.log(mass(pair.target))
    out = np.empty_like(r)
    tp, ratio = profile.derivative(r), profile.ratio(r)
    tt = profile(r)
    for k, rk in enumerate(r):
        lg = pair.target.radial_log_density(float(tt[k])) - lmg
        lf = pair.source.radial_log_density(float(rk)) - lmf
        out[k] = abs(tp[k] * ratio[k] ** (d - 1) * math.exp(lg - lf) - 1)
    return out


# -------------------------------------------------------------------- 1-D
class _LineSolver:
    def __init__(self, pair, tol):
        if pair.dimension != 1:
            raise ValueError("1-D map needs d = 1")
        self.tol = tol
        self.f_lo, self.f_up, self.f_pdf = line_masses(pair.source, tol)
        self.g_lo, self.g_up, self.g_pdf = line_masses(pair.target, tol)
        self.mf = self.f_lo(0.0) + self.f_up(0.0)
        self.mg = self.g_lo(0.0) + self.g_up(0.0)

    def solve(self, x, guess=None):
        y0 = x if guess is None else guess
        step = max(1.0, abs(y0))
        width = lambda s: 1e-3 * max(1.0, abs(s))
        dphi = lambda y: self.g_pdf(y) / self.mg
        lower = self.f_lo(x) / self.mf
        if lower <= 0.5:
            phi = lambda y: self.g_lo(y) / self.mg
            return monotone_root(phi, dphi, lower, y0, step, width)
        upper = self.f_up(x) / self.mf
        phi = lambda y: -self.g_up(y) / self.mg
        return monotone_root(phi, dphi, -upper, y0, step, width)

    def slope(self, x, y):
        return (self.f_pdf(x) / self.mf) / (self.g_pdf(y) / self.mg)


def cdf_map_1d(pair, x, tol=DEFAULT_TOL):
    """T(x) = G^{-1}(F(x)) for scalar or array x."""
    solver = _LineSolver(pair, tol)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([solver.solve(float(v)) for v in xs])
    return out[0] if np.ndim(x) == 0 else out


def cdf_pair_masses(pair, tol=DEFAULT_TOL):
    """(F, G) as callables on the real line, normalized by the total masses."""
    s = _LineSolver(pair, tol)
    return (lambda x: s.f_lo(x) / s.mf), (lambda y: s.g_lo(y) / s.mg)


@dataclass
class Profile1D:
    """Monotone 1-D map on a symmetric log grid, with exact node slopes."""

    x: np.ndarray
    T: np.ndarray
    slope: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        self.slope = np.asarray(self.slope, dtype=float)
        self._spline = CubicHermiteSpline(self.x, self.T, _fc_limit(self.x, self.T, self.slope))
        self._dspline = self._spline.derivative()
        self.dimension = 1

    @property
    def horizon(self):
        return float(min(-self.x[0], self.x[-1]))

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > self.horizon * (1 + 1e-12)):
            raise RadiusOutOfRange(f"point outside [-{self.horizon:g}, {self.horizon:g}]")
        return x

    def __call__(self, x):
        return self._spline(self._check(x))

    def derivative(self, x):
        return self._dspline(self._check(x))

    def map_points(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != 1:
            x = x[..., None]
        return self(x[..., 0])[..., None]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "T", "T_prime"])
            for row in zip(self.x, self.T, self.slope):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2])

    def to_dict(self):
        return {"kind": "line", "dimension": 1, "x": self.x.tolist(), "T": self.T.tolist(),
                "slope": self.slope.tolist()}


def line_map(pair, horizon=1e3, n_side=256, r_min=1e-3, tol=DEFAULT_TOL):
    """Profile1D of the 1-D monotone map on [-horizon, horizon]."""
    solver = _LineSolver(pair, tol)
    pos = np.geomspace(r_min, horizon, n_side)
    xs = np.concatenate([-pos[::-1], [0.0], pos])
    T = np.empty_like(xs)
    c = n_side
    T[c] = solver.solve(0.0)
    for idx in (range(c + 1, len(xs)), range(c - 1, -1, -1)):
        prev = c
        for i in idx:
            guess = T[prev] + solver.slope(xs[prev], T[prev]) * (xs[i] - xs[prev])
            T[i] = solver.solve(xs[i], guess)
            prev = i
    slopes = np.array([solver.slope(a, b) for a, b in zip(xs, T)])
    return Profile1D(xs, T, slopes)


def ma_residual_1d(pair, profile, x):
    """|T'(x) g(T(x)) / f(x) - 1| with both densities mass-normalized."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = _LineSolver(pair, DEFAULT_TOL)
    Tp, T = profile.derivative(x), profile(x)
    return np.array([abs(a * (s.g_pdf(b) / s.mg) / (s.f_pdf(v) / s.mf) - 1) for v, a, b in zip(x, Tp, T)])


def profile_from_dict(data):
    if data["kind"] == "radial":
        return RadialProfile(data["r"], data["t"], data["slope"], data["dimension"])
    if data["kind"] == "line":
        return Profile1D(data["x"], data["T"], data["slope"])
    raise ValueError(f"unknown profile kind {data['kind']!r}")
