"""Deterministic point and direction samples.

Nothing in the package draws random numbers: every "sup over a sample" is taken
over one of the sets built here, so two runs see exactly the same points.
"""
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc


def sphere_directions(d, n):
    """Unit vectors in R^d: a low-discrepancy set of about ``n`` plus the ±axes.

    d=1 gives {+1, -1}; d=2 equally spaced angles; d=3 a Fibonacci lattice;
    higher d an unscrambled Halton set pushed through the normal quantile.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]])
    axes = np.vstack([np.eye(d), -np.eye(d)])
    if n <= 0:
        return axes
    if d == 2:
        ang = 2 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
    elif d == 3:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        phi = np.pi * (1 + 5**0.5) * k
        rho = np.sqrt(1 - z**2)
        pts = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        u = qmc.Halton(d, scramble=False).random(n + 1)[1:]
        pts = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    allp = np.vstack([axes, pts])
    # drop near-duplicates of the axes, keep order deterministic
    keep = [0]
    for i in range(1, len(allp)):
        if np.min(np.linalg.norm(allp[keep] - allp[i], axis=1)) > 1e-9:
            keep.append(i)
    return allp[keep]


def log_radii(r_min, r_max, n, include_zero=True):
    r = np.geomspace(r_min, r_max, n)
    return np.concatenate([[0.0], r]) if include_zero else r


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid for hypothesis certification: log radii times directions."""

    horizon: float = 1e3
    n_radii: int = 160
    r_min: float = 1e-2
    n_directions: int = 16

    def radii(self):
        return log_radii(self.r_min, self.horizon, self.n_radii)

    def directions(self, d):
        return sphere_directions(d, self.n_directions)

    def points(self, d):
        r = self.radii()
        e = self.directions(d)
        pts = (r[:, None, None] * e[None, :, :]).reshape(-1, d)
        # the origin appears once per direction; keep one copy
        return np.unique(pts, axis=0) if r[0] == 0 else pts

    def refined(self, factor=2):
        return replace(self, n_radii=factor * self.n_radii,
                       n_directions=factor * self.n_directions)

    def describe(self, d):
        return {"horizon": self.horizon, "n_radii": self.n_radii, "r_min": self.r_min,
                "n_directions": int(len(self.directions(d))), "dimension": d}


@dataclass(frozen=True)
class AsymptoticSample:
    """Sample of (z, e, alpha) for the incremental-ratio hypotheses."""

    r_lo: float = 10.0
    horizon: float = 1e3
    n_radii: int = 24
    n_directions: int = 8
    alpha0: float = 0.5
    n_alpha: int = 4

    def radii(self):
        return np.geomspace(self.r_lo, self.horizon, self.n_radii)

    def alphas(self):
        # strictly inside (0, alpha0)
        return self.alpha0 * np.geomspace(0.9, 0.1, self.n_alpha)

    def describe(self, d):
        return {"r_lo": self.r_lo, "horizon": self.horizon, "n_radii": self.n_radii,
                "n_directions": int(len(sphere_directions(d, self.n_directions))),
                "alpha0": self.alpha0, "n_alpha": self.n_alpha}
