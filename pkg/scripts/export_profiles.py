"""Export oracle radial profiles (r, t, t', t/r) as CSV for plotting."""
import argparse
import math
import pathlib

from otbounds import oracle as O
from otbounds.potentials import DensityPair, Potential, normalize

SQPI = math.sqrt(math.pi)
PAIRS = {
    "radial_scaling_2d": DensityPair(Potential(2, "power", SQPI, 2.0),
                                     Potential(2, "scaled-power", SQPI, 2.0, scale=3.0), normalized=True),
    "cauchy_to_gauss_2d": DensityPair(Potential(2, "power", SQPI, 2.0), Potential(2, "gaussian-exp"),
                                      normalized=True),
    "sublinear_2d": normalize(DensityPair(Potential(2, "power", 1.0, 3.0), Potential(2, "power", 1.0, 2.0))),
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="profiles")
    ap.add_argument("--horizon", type=float, default=1e3)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, pair in PAIRS.items():
        prof = O.radial_map(pair, O.default_radial_grid(args.horizon, 512))
        prof.to_csv(out / f"{name}.csv")
        print(out / f"{name}.csv")
