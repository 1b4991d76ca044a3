"""Monotone transport maps between V^{-d} densities, with certified growth and Lipschitz bounds."""
__version__ = "0.1.0"

from .potentials import DensityPair, Potential, Truncation, evaluate, density, mass, normalize, truncate
from .sampling import AsymptoticSample, GridSpec

__all__ = ["DensityPair", "Potential", "Truncation", "evaluate", "density", "mass", "normalize",
           "truncate", "AsymptoticSample", "GridSpec"]
