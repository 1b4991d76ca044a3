"""Decade trend of |T(x)| / sqrt(1 + log(1 + |x|)) for Cauchy-type sources into the standard Gaussian.

Prints, for consecutive decades, the max envelope ratio and its ratio to the
previous decade; the d = 1 row also shows the closed form via the normal quantile.
"""
import math

import numpy as np
from scipy.special import ndtri

from otbounds import oracle as O
from otbounds.potentials import DensityPair, Potential


def decade_maxima(radii, ratios, edges):
    return [float(np.max(ratios[(radii >= a) & (radii <= b)])) for a, b in zip(edges, edges[1:])]


def main():
    edges = [10.0, 1e2, 1e3, 1e4, 1e5]
    radii = np.geomspace(edges[0], edges[-1], 241)
    env = np.sqrt(1 + np.log1p(radii))
    for d, source in ((1, Potential(1, "power", math.pi, 2.0)), (2, Potential(2, "power", math.sqrt(math.pi), 2.0))):
        pair = DensityPair(source, Potential(d, "gaussian-exp"), normalized=True)
        prof = O.radial_map(pair, O.default_radial_grid(edges[-1], 768))
        m = decade_maxima(radii, prof(radii) / env, edges)
        trend = [b / a for a, b in zip(m, m[1:])]
        print(f"d={d} decade maxima {np.round(m, 5).tolist()} successive trend {np.round(trend, 5).tolist()}")
        if d == 1:
            exact = -ndtri(np.arctan(1 / radii) / math.pi) / env
            print(f"d=1 closed form   {np.round(decade_maxima(radii, exact, edges), 5).tolist()}")


if __name__ == "__main__":
    main()
