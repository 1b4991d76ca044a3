"""Entropic optimal transport on truncated grids, d in {1, 2}.

Log-domain Sinkhorn with epsilon scaling and Anderson acceleration of the
target potential.  In 2-D the quadratic cost is separable, so every soft
c-transform is two successive 1-D log-sum-exps over n^3 tensors instead of one
over n^4.

Supports: the source lives on the ball B_L (an interval in 1-D, a disk in 2-D)
sampled on a box grid.  For radial or 1-D pairs the target support is
"matched": its radius is chosen so that the target mass outside it equals the
source mass outside B_L, so the map between truncated measures coincides with
the untruncated map restricted to B_L.  Other 2-D pairs use the source box.
"""
import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import logsumexp

from .errors import RadiusOutOfRange, SolverError, TailTooHeavy
from .oracle import _LineSolver, _RadialSolver
from .potentials import ball_mass, line_masses, mass, tail_mass

MAX_TAIL = 0.10
BOUNDARY_CELLS = 3


@dataclass
class GridMeasure:
    """Weights on the tensor grid ``axis`` x ... x ``axis``; zero outside the support."""

    dimension: int
    half_width: float
    n: int
    axis: np.ndarray
    weights: np.ndarray
    tail_mass: float
    support: str = "ball"              # ball | box | interval
    center: float = 0.0                # 1-D interval center
    support_radius: float = 0.0

    @property
    def cell(self):
        return float(self.axis[1] - self.axis[0])

    def points(self):
        if self.dimension == 1:
            return self.axis[:, None]
        X1, X2 = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.stack([X1, X2], axis=-1)

    def log_weights(self):
        with np.errstate(divide="ignore"):
            return np.log(self.weights)


def _support_mask(d, axis, radius, center=0.0):
    if d == 1:
        return np.abs(axis - center) <= radius * (1 + 1e-12)
    X1, X2 = np.meshgrid(axis, axis, indexing="ij")
    return np.hypot(X1, X2) <= radius * (1 + 1e-12)


def _grid_measure(pot, d, axis, mask, tail, support, radius, center=0.0):
    if d == 1:
        pts = axis[:, None]
    else:
        X1, X2 = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([X1, X2], axis=-1)
    w = np.where(mask, pot.density(pts), 0.0)
    w = w / w.sum()
    half = float(np.max(np.abs(axis - center))) if d == 1 else float(axis[-1])
    return GridMeasure(d, half, len(axis), axis, w, float(tail), support, center, float(radius))


def matched_target_radius(pair, L, tol=1e-12):
    """Target radius whose outer mass equals the source mass outside B_L (radial pairs)."""
    return _RadialSolver(pair, tol).solve(L)


def discretize(pair, L, n, matched=True, tol=1e-12):
    """(source, target) GridMeasures for the truncation of the pair to B_L.

    Raises TailTooHeavy when more than 10% of the source mass lies outside B_L.
    """
    d = pair.dimension
    if d not in (1, 2):
        raise ValueError("grid solver supports d in {1, 2}")
    f, g = pair.source, pair.target
    mf = mass(f, tol)
    tail_f = tail_mass(f, L, tol) / mf
    if tail_f > MAX_TAIL:
        raise TailTooHeavy(f"source mass outside B_{L:g} is {tail_f:.3g} > {MAX_TAIL}")
    x_axis = np.linspace(-L, L, n)
    src = _grid_measure(f, d, x_axis, _support_mask(d, x_axis, L), tail_f,
                        "interval" if d == 1 else "ball", L)
    if d == 1 and matched:
        s = _LineSolver(pair, tol)
        lo, hi = s.solve(-L), s.solve(L)
        c, Rg = 0.5 * (lo + hi), 0.5 * (hi - lo)
        y_axis = np.linspace(lo, hi, n)
        lower, upper, _ = line_masses(g, tol)
        tail_g = (lower(lo) + upper(hi)) / s.mg
        tgt = _grid_measure(g, d, y_axis, np.ones(n, bool), tail_g, "interval", Rg, c)
    elif d == 2 and matched and pair.radial:
        Rg = matched_target_radius(pair, L, tol)
        y_axis = np.linspace(-Rg, Rg, n)
        tail_g = tail_mass(g, Rg, tol) / mass(g, tol)
        tgt = _grid_measure(g, d, y_axis, _support_mask(d, y_axis, Rg), tail_g, "ball", Rg)
    else:
        mg = mass(g, tol)
        tail_g = 1 - ball_mass(g, L, tol) / mg if d == 2 else tail_mass(g, L, tol) / mg
        tgt = _grid_measure(g, d, x_axis, _support_mask(d, x_axis, L), tail_g,
                            "interval" if d == 1 else "ball", L)
    return src, tgt


# ------------------------------------------------------------------ solver
def default_schedule(source, target, steps_per_decade=4):
    """Geometric epsilon from diam^2/8 down to (2L/n)^2."""
    d = source.dimension
    if d == 1:
        diam = (source.axis[-1] - source.axis[0] + target.axis[-1] - target.axis[0]) / 2 + \
            abs(source.center - target.center)
    else:
        diam = source.support_radius + target.support_radius
    hi = diam**2 / 8
    lo = (2 * source.half_width / source.n) ** 2
    k = max(1, int(math.ceil(steps_per_decade * math.log10(hi / lo))))
    return np.geomspace(hi, lo, k + 1)


def _lse_last(a):
    """logsumexp over the last axis, in place on ``a`` (a temporary)."""
    m = a.max(axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    np.subtract(a, m, out=a)
    np.exp(a, out=a)
    with np.errstate(divide="ignore"):
        return np.log(a.sum(axis=-1)) + m[..., 0]


def _softmin(h, x, y, eps):
    """out[i] = -eps * log sum_j exp(h[j] - |x_i - y_j|^2 / eps) on tensor grids."""
    C = (x[:, None] - y[None, :]) ** 2 / eps
    if h.ndim == 1:
        return -eps * logsumexp(h[None, :] - C, axis=1)
    # separable: reduce over j2, then over j1, each along a contiguous last axis
    H = _lse_last(h[:, None, :] - C[None, :, :])                       # [j1, i2]
    return -eps * _lse_last(np.ascontiguousarray(H.T)[None, :, :] - C[:, None, :])  # [i1, i2]


@dataclass
class EntropicPlan:
    """Dual potentials (f on the source grid, g on the target grid) at the final epsilon."""

    source: GridMeasure
    target: GridMeasure
    f: np.ndarray
    g: np.ndarray
    eps: float
    marginal_error: float
    source_marginal_error: float
    tol: float
    trace: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)   # [(eps, f, g)] for the last stages

    @property
    def converged(self):
        return self.marginal_error <= self.tol and self.source_marginal_error <= self.tol


def _marginal_errors(src, tgt, f, g, eps):
    la, lb = src.log_weights(), tgt.log_weights()
    f_exact = _softmin(lb + g / eps, src.axis, tgt.axis, eps)
    g_exact = _softmin(la + f / eps, tgt.axis, src.axis, eps)
    with np.errstate(invalid="ignore", over="ignore"):
        row = np.nanmax(np.abs(src.weights * np.expm1((f - f_exact) / eps)))
        col = np.nanmax(np.abs(tgt.weights * np.expm1((g - g_exact) / eps)))
    return float(row), float(col)


def solve_entropic(source, target, eps_schedule=None, tol=1e-7, max_iter=20000, memory=8,
                   keep_snapshots=3, verbose=False):
    """Log-domain Sinkhorn with epsilon scaling, warm starts and Anderson acceleration.

    At every epsilon the iteration stops once the target marginal error
    max_j |sum_i P_ij - b_j| is <= tol (the source marginal is exact after each
    f update).  Raises SolverError with the iteration trace otherwise.
    """
    if eps_schedule is None:
        eps_schedule = default_schedule(source, target)
    la, lb = source.log_weights(), target.log_weights()
    x, y = source.axis, target.axis
    b = target.weights
    on = b > 0
    g = np.zeros_like(b)
    trace, snaps = [], []
    f = None
    for eps in eps_schedule:
        eps = float(eps)
        Gs, Rs = [], []
        best_err = math.inf
        err = math.inf
        for it in range(1, max_iter + 1):
            f = _softmin(lb + g / eps, x, y, eps)
            if not np.all(np.isfinite(f[source.weights > 0])):
                raise SolverError(f"epsilon underflow at eps={eps:.3g}", trace)
            gn = _softmin(la + f / eps, y, x, eps)
            with np.errstate(invalid="ignore", over="ignore"):
                err = float(np.nanmax(np.abs(b * np.expm1((g - gn) / eps))))
            if not np.isfinite(err):
                raise SolverError(f"non-finite marginal error at eps={eps:.3g}", trace)
            if err <= tol:
                break
            r = np.where(on, gn - g, 0.0)
            r = np.where(on, r - r[on].mean(), 0.0)
            if err > 10 * best_err:
                Gs, Rs = [], []
            best_err = min(best_err, err)
            Gs.append(gn.ravel().copy())
            Rs.append(r.ravel().copy())
            if len(Rs) > memory:
                Gs.pop(0)
                Rs.pop(0)
            if len(Rs) > 1:
                dR = np.diff(np.array(Rs), axis=0).T
                dG = np.diff(np.array(Gs), axis=0).T
                gam = np.linalg.lstsq(dR, Rs[-1], rcond=None)[0]
                cand = (Gs[-1] - dG @ gam).reshape(gn.shape)
                g = cand if np.all(np.isfinite(cand)) else gn
            else:
                g = gn
        trace.append({"eps": eps, "iterations": it, "marginal_error": err})
        if verbose:
            print(f"eps={eps:.4g} iterations={it} err={err:.2e}", flush=True)
        if err > tol:
            raise SolverError(f"no convergence at eps={eps:.3g} after {max_iter} iterations "
                              f"(marginal error {err:.3g})", trace)
        f = _softmin(lb + g / eps, x, y, eps)
        snaps.append((eps, f.copy(), g.copy()))
        snaps = snaps[-keep_snapshots:]
    row, col = _marginal_errors(source, target, f, g, eps)
    return EntropicPlan(source, target, f, g, eps, col, row, tol, trace, snaps)


# ------------------------------------------------------------- extraction
@dataclass
class MapSample:
    """Map values on the source grid with interior derivative estimates.

    ``eigs`` holds the eigenvalues of the symmetrized centered-difference DT
    (ascending), NaN outside the interior.
    """

    dimension: int
    axis: np.ndarray
    points: np.ndarray
    values: np.ndarray
    eigs: np.ndarray
    interior: np.ndarray
    half_width: float
    support_radius: float
    eps: Optional[float] = None

    def _interp(self):
        if not hasattr(self, "_cache"):
            if self.dimension == 1:
                self._cache = [RegularGridInterpolator((self.axis,), self.values[:, 0])]
            else:
                self._cache = [RegularGridInterpolator((self.axis, self.axis), self.values[..., k])
                               for k in range(2)]
        return self._cache

    def map_points(self, x, limit=None):
        """Linear interpolation of T; points must lie within ``limit`` (default L/2)."""
        x = np.asarray(x, dtype=float)
        if self.dimension == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        limit = 0.5 * self.support_radius if limit is None else limit
        if np.any(np.linalg.norm(x, axis=-1) > limit * (1 + 1e-12)):
            raise RadiusOutOfRange(f"grid map is verified only on |x| <= {limit:g}")
        flat = x.reshape(-1, self.dimension)
        out = np.stack([it(flat) for it in self._interp()], axis=-1)
        return out.reshape(x.shape)

    @property
    def horizon(self):
        return 0.5 * self.support_radius

    def to_csv(self, path):
        d = self.dimension
        pts = self.points.reshape(-1, d)
        vals = self.values.reshape(-1, d)
        eig = self.eigs.reshape(-1, d)
        names = [f"x{k}" for k in range(d)] + [f"T{k}" for k in range(d)] + [f"eig{k}" for k in range(d)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for a, b, c in zip(pts, vals, eig):
                w.writerow([repr(float(v)) for v in (*a, *b, *c)])

    def to_dict(self):
        return {"kind": "grid", "dimension": self.dimension, "axis": self.axis.tolist(),
                "values": self.values.tolist(), "eigs": np.where(np.isnan(self.eigs), None,
                                                                  self.eigs).tolist(),
                "interior": self.interior.tolist(), "half_width": self.half_width,
                "support_radius": self.support_radius, "eps": self.eps}

    @classmethod
    def from_dict(cls, data):
        d = data["dimension"]
        axis = np.asarray(data["axis"], dtype=float)
        values = np.asarray(data["values"], dtype=float)
        eigs = np.array([[np.nan if v is None else v for v in row] for row in
                         np.asarray(data["eigs"], dtype=object).reshape(-1, d)], dtype=float)
        eigs = eigs.reshape(values.shape)
        if d == 1:
            points = axis[:, None]
        else:
            X1, X2 = np.meshgrid(axis, axis, indexing="ij")
            points = np.stack([X1, X2], axis=-1)
        return cls(d, axis, points, values, eigs, np.asarray(data["interior"], dtype=bool),
                   data["half_width"], data["support_radius"], data.get("eps"))


def _barycentric(source, target, g, eps):
    lb = target.log_weights() + g / eps
    x, y = source.axis, target.axis
    C = (x[:, None] - y[None, :]) ** 2 / eps
    if source.dimension == 1:
        A = lb[None, :] - C
        W = np.exp(A - logsumexp(A, axis=1, keepdims=True))
        return (W @ y)[:, None]
    comps = []
    for h in (lb, lb.T):
        H = logsumexp(h[:, None, :] - C[None, :, :], axis=2)        # [j1, i2]
        A = H[None, :, :] - C[:, :, None]                            # [i1, j1, i2]
        W = np.exp(A - logsumexp(A, axis=1, keepdims=True))
        comps.append(np.einsum("ijk,j->ik", W, y))
    return np.stack([comps[0], comps[1].T], axis=-1)


def _map_sample(source, target, g, eps):
    d = source.dimension
    T = _barycentric(source, target, g, eps)
    h = source.cell
    pts = source.points()
    rho = np.linalg.norm(pts.reshape(-1, d), axis=-1).reshape(pts.shape[:-1])
    interior = rho <= source.support_radius - BOUNDARY_CELLS * h
    edge = np.zeros(rho.shape, bool)
    for k in range(d):
        idx = [slice(None)] * d
        for s in (slice(0, BOUNDARY_CELLS), slice(-BOUNDARY_CELLS, None)):
            idx[k] = s
            edge[tuple(idx)] = True
    interior &= ~edge
    eigs = np.full(T.shape, np.nan)
    if d == 1:
        dT = np.gradient(T[:, 0], h)
        eigs[:, 0] = np.where(interior, dT, np.nan)
    else:
        J = np.empty(T.shape[:-1] + (2, 2))
        for k in range(2):
            J[..., k, 0], J[..., k, 1] = np.gradient(T[..., k], h)
        S = 0.5 * (J + np.swapaxes(J, -1, -2))
        ev = np.linalg.eigvalsh(S)
        eigs = np.where(interior[..., None], ev, np.nan)
    return MapSample(d, source.axis, pts, T, eigs, interior, source.half_width,
                     source.support_radius, eps)


def extract_map(plan):
    """Barycentric projection T(x_i) = sum_j P_ij y_j / sum_j P_ij of the final plan."""
    return _map_sample(plan.source, plan.target, plan.g, plan.eps)


def snapshot_maps(plan):
    """MapSamples of the retained epsilon stages, coarsest first."""
    return [_map_sample(plan.source, plan.target, g, eps) for eps, _, g in plan.snapshots]


def compare_to_oracle(sample, oracle, region=None):
    """sup |T_numeric - T_oracle| over interior nodes with |x| <= region (default L/2)."""
    region = 0.5 * sample.support_radius if region is None else region
    d = sample.dimension
    pts = sample.points.reshape(-1, d)
    vals = sample.values.reshape(-1, d)
    mask = sample.interior.reshape(-1) & (np.linalg.norm(pts, axis=-1) <= region * (1 + 1e-12))
    if not mask.any():
        raise RadiusOutOfRange("no interior nodes inside the comparison region")
    ref = oracle.map_points(pts[mask]) if hasattr(oracle, "map_points") else oracle(pts[mask])
    return float(np.max(np.linalg.norm(vals[mask] - ref, axis=-1)))


def monotonicity_defect(sample, region=None, max_pairs=20000):
    """min over sampled interior pairs of (T_i - T_j).(x_i - x_j); deterministic pair set."""
    region = 0.5 * sample.support_radius if region is None else region
    d = sample.dimension
    pts = sample.points.reshape(-1, d)
    vals = sample.values.reshape(-1, d)
    mask = sample.interior.reshape(-1) & (np.linalg.norm(pts, axis=-1) <= region)
    P, V = pts[mask], vals[mask]
    n = len(P)
    k = np.arange(max_pairs)
    i = k % n
    j = (i + 1 + (k * 7919) % (n - 1)) % n
    return float(np.min(np.sum((V[i] - V[j]) * (P[i] - P[j]), axis=-1)))
