"""Potential families V, W and the densities V^{-d}, W^{-d}.

Families
--------
power          a * <x>^r                     with <x> = sqrt(1 + |x|^2)
scaled-power   a * s * <x/s>^r               (density is the s-dilation of the power one)
gaussian-exp   c * exp(|x|^2 / (2 d s^2))    (density is N(0, s^2 Id) when c = sqrt(2 pi) s)
custom-composite  coefficient * expression(x0, ..., x{d-1}), or a plain callable

The first three are radial; all radial quantities are computed from the
one-dimensional profile v(rho).
"""
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np
import sympy as sp
from scipy import integrate

from .errors import NonIntegrableError, QuadratureError

FAMILIES = ("power", "scaled-power", "gaussian-exp", "custom-composite")
RADIAL_FAMILIES = ("power", "scaled-power", "gaussian-exp")

DEFAULT_TOL = 1e-10


def unit_sphere_area(d):
    """Surface area of S^{d-1}; equals 2 for d = 1."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


class RadialJet(NamedTuple):
    """Profile data at radius rho, scaled by 1/v so nothing overflows.

    v    : value v(rho) (may be inf for the gaussian family at huge rho)
    dlog : v'/v
    h2   : v''/v            (radial Hessian eigenvalue over v)
    h1   : (v'/rho)/v       (tangential Hessian eigenvalue over v)
    """

    v: np.ndarray
    dlog: np.ndarray
    h2: np.ndarray
    h1: np.ndarray


@lru_cache(maxsize=64)
def _compile_expression(expression, d):
    xs = sp.symbols(f"x0:{d}")
    expr = sp.sympify(expression, locals={f"x{i}": xs[i] for i in range(d)})
    grad = [sp.diff(expr, xi) for xi in xs]
    hess = [[sp.diff(g, xj) for xj in xs] for g in grad]
    f = sp.lambdify(xs, expr, "numpy")
    gf = [sp.lambdify(xs, g, "numpy") for g in grad]
    hf = [[sp.lambdify(xs, h, "numpy") for h in row] for row in hess]
    return f, gf, hf


@dataclass(frozen=True)
class Potential:
    """A smooth positive potential whose -d power is a density on R^d.

    ``exponent`` is the declared growth exponent (the p or q of the family);
    for the gaussian family it only enters the growth hypotheses.
    ``floor`` is the declared lower bound v_min; it is fixed per family and
    must be supplied for custom potentials.
    """

    dimension: int
    family: str = "power"
    coefficient: Optional[float] = None
    exponent: float = 2.0
    scale: float = 1.0
    floor: Optional[float] = None
    expression: Optional[str] = None
    value_fn: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.family == "power" and self.scale != 1.0:
            raise ValueError("power family has no scale; use scaled-power")
        if self.coefficient is None:
            c = math.sqrt(2 * math.pi) * self.scale if self.family == "gaussian-exp" else 1.0
            object.__setattr__(self, "coefficient", c)
        if self.coefficient <= 0 and self.family != "custom-composite":
            raise ValueError("coefficient must be positive")
        if self.family == "custom-composite":
            if (self.expression is None) == (self.value_fn is None):
                raise ValueError("custom-composite needs exactly one of expression / value_fn")
        elif self.floor is None:
            object.__setattr__(self, "floor", self._family_floor())

    # ------------------------------------------------------------------ basics
    @property
    def radial(self):
        return self.family in RADIAL_FAMILIES

    @property
    def derivatives_available(self):
        return self.value_fn is None

    def _family_floor(self):
        if self.family == "gaussian-exp":
            return self.coefficient
        a, s, r = self.coefficient, self.scale, self.exponent
        if r >= 0:
            return a * s
        return 0.0

    def scaled(self, k):
        """Return k * V."""
        if self.family == "custom-composite" and self.value_fn is not None:
            fn = self.value_fn
            return replace(self, value_fn=lambda x: k * fn(x),
                           floor=None if self.floor is None else k * self.floor)
        floor = None if self.floor is None else k * self.floor
        return replace(self, coefficient=self.coefficient * k, floor=floor)

    def to_dict(self):
        if self.value_fn is not None:
            raise ValueError("callable-backed potentials are not serializable")
        out = {"family": self.family, "dimension": self.dimension,
               "coefficient": self.coefficient, "exponent": self.exponent,
               "scale": self.scale}
        if self.family == "custom-composite":
            out["expression"] = self.expression
            out["floor"] = self.floor
        return out

    @classmethod
    def from_dict(cls, data):
        keys = ("dimension", "family", "coefficient", "exponent", "scale", "floor", "expression")
        return cls(**{k: data[k] for k in keys if k in data and data[k] is not None})

    # ---------------------------------------------------------- radial profile
    def jet(self, rho):
        """Radial profile data at radii ``rho`` (radial families only)."""
        if not self.radial:
            raise ValueError("jet() needs a radial family")
        rho = np.asarray(rho, dtype=float)
        a, s, r, d = self.coefficient, self.scale, self.exponent, self.dimension
        if self.family == "gaussian-exp":
            k = 1.0 / (d * s * s)
            with np.errstate(over="ignore"):
                v = a * np.exp(0.5 * k * rho**2)
            return RadialJet(v, k * rho, k + (k * rho) ** 2, np.full_like(rho, k))
        u = rho / s
        w = 1.0 + u * u
        with np.errstate(over="ignore"):
            v = a * s * w ** (r / 2)
        dlog = r * u / (s * w)
        h1 = r / (s * s * w)
        h2 = r * (1 + (r - 1) * u * u) / (s * s * w * w)
        return RadialJet(v, dlog, h2, h1)

    def radial_value(self, rho):
        """Scalar v(rho) for quadrature; plain floats for speed."""
        a, s, r = self.coefficient, self.scale, self.exponent
        if self.family == "gaussian-exp":
            return a * math.exp(rho * rho / (2 * self.dimension * s * s))
        return a * s * (1.0 + (rho / s) ** 2) ** (r / 2)

    def radial_log_value(self, rho):
        """Vectorized log v(rho); finite even where v itself overflows."""
        rho = np.asarray(rho, dtype=float)
        a, s, r, d = self.coefficient, self.scale, self.exponent, self.dimension
        if self.family == "gaussian-exp":
            return math.log(a) + rho**2 / (2 * d * s * s)
        return math.log(a * s) + 0.5 * r * np.log1p((rho / s) ** 2)

    def log_value(self, x):
        if self.radial:
            return self.radial_log_value(np.linalg.norm(self._as_points(x), axis=-1))
        return np.log(self.value(x))

    def log_ratio(self, x, y):
        """log V(y) - log V(x) without cancellation for nearby points.

        Radial families use |y|^2 - |x|^2 = (y - x).(y + x), so the increment
        keeps full relative accuracy when y - x is small against |x|.
        """
        x, y = np.broadcast_arrays(self._as_points(x), self._as_points(y))
        if not self.radial:
            return self.log_value(y) - self.log_value(x)
        s, r, d = self.scale, self.exponent, self.dimension
        dsq = np.sum((y - x) * (y + x), axis=-1) / (s * s)
        if self.family == "gaussian-exp":
            return dsq / (2 * d)
        return 0.5 * r * np.log1p(dsq / (1.0 + np.sum(x * x, axis=-1) / (s * s)))

    def radial_log_density(self, rho):
        """log of v(rho)^{-d}, safe where v overflows."""
        a, s, r, d = self.coefficient, self.scale, self.exponent, self.dimension
        if self.family == "gaussian-exp":
            return -d * math.log(a) - rho * rho / (2 * s * s)
        return -d * (math.log(a * s) + 0.5 * r * math.log1p((rho / s) ** 2))

    # -------------------------------------------------------------- evaluation
    def _as_points(self, x):
        x = np.asarray(x, dtype=float)
        if self.dimension == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != self.dimension:
            raise ValueError(f"points must have trailing dimension {self.dimension}")
        return x

    def value(self, x):
        x = self._as_points(x)
        if self.radial:
            return self.jet(np.linalg.norm(x, axis=-1)).v
        if self.value_fn is not None:
            flat = x.reshape(-1, self.dimension)
            return np.asarray(self.value_fn(flat), dtype=float).reshape(x.shape[:-1])
        f, _, _ = _compile_expression(self.expression, self.dimension)
        cols = [x[..., i] for i in range(self.dimension)]
        return self.coefficient * np.broadcast_to(np.asarray(f(*cols), dtype=float), x.shape[:-1])

    def gradient(self, x):
        x = self._as_points(x)
        if self.radial:
            j = self.jet(np.linalg.norm(x, axis=-1))
            return (j.v * j.h1)[..., None] * x
        if self.value_fn is not None:
            return _fd_gradient(self.value, x)
        _, gf, _ = _compile_expression(self.expression, self.dimension)
        cols = [x[..., i] for i in range(self.dimension)]
        g = [np.broadcast_to(np.asarray(fn(*cols), dtype=float), x.shape[:-1]) for fn in gf]
        return self.coefficient * np.stack(g, axis=-1)

    def hessian(self, x):
        x = self._as_points(x)
        d = self.dimension
        if self.radial:
            rho = np.linalg.norm(x, axis=-1)
            j = self.jet(rho)
            # (v''-v'/rho)/rho^2 in closed form, no 0/0 at the origin
            a, s, r = self.coefficient, self.scale, self.exponent
            if self.family == "gaussian-exp":
                k = 1.0 / (d * s * s)
                g2 = j.v * k * k
            else:
                w = 1.0 + (rho / s) ** 2
                g2 = a * r * (r - 2) / s**3 * w ** (r / 2 - 2)
            eye = np.eye(d)
            return (j.v * j.h1)[..., None, None] * eye + g2[..., None, None] * (x[..., :, None] * x[..., None, :])
        if self.value_fn is not None:
            return _fd_hessian(self.value, x)
        _, _, hf = _compile_expression(self.expression, d)
        cols = [x[..., i] for i in range(d)]
        h = np.empty(x.shape[:-1] + (d, d))
        for i in range(d):
            for k in range(d):
                h[..., i, k] = np.broadcast_to(np.asarray(hf[i][k](*cols), dtype=float), x.shape[:-1])
        return self.coefficient * h

    def density(self, x):
        v = self.value(x)
        with np.errstate(over="ignore"):
            return v ** (-float(self.dimension))


def _fd_gradient(fun, x, h=1e-5):
    d = x.shape[-1]
    g = np.empty(x.shape)
    for i in range(d):
        e = np.zeros(d)
        step = h * np.maximum(1.0, np.abs(x[..., i]))
        e[i] = 1.0
        g[..., i] = (fun(x + step[..., None] * e) - fun(x - step[..., None] * e)) / (2 * step)
    return g


def _fd_hessian(fun, x, h=1e-4):
    d = x.shape[-1]
    H = np.empty(x.shape + (d,))
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        step = h * np.maximum(1.0, np.abs(x[..., i]))
        H[..., i, :] = (_fd_gradient(fun, x + step[..., None] * e)
                        - _fd_gradient(fun, x - step[..., None] * e)) / (2 * step[..., None])
    return 0.5 * (H + np.swapaxes(H, -1, -2))


def evaluate(pot, x):
    """(value, gradient, hessian) of ``pot`` at ``x``."""
    return pot.value(x), pot.gradient(x), pot.hessian(x)


def density(pot, x):
    return pot.density(x)


# ---------------------------------------------------------------- quadrature
def _quad(fun, a, b, tol):
    val, err, info = _quad_full(fun, a, b, tol)
    return val


def _quad_full(fun, a, b, tol):
    out = integrate.quad(fun, a, b, epsabs=0.0, epsrel=max(tol, 1e-14), limit=200,
                         full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 and err > max(tol, 1e-14) * max(abs(val), 1e-300) * 10 and err > 1e-300:
        raise QuadratureError(f"quadrature did not reach tol={tol:g} (estimate {err:.3g} on {val:.6g})")
    return val, err, out[2]


def _check_integrable(pot):
    if pot.family in ("power", "scaled-power") and pot.exponent <= 1.0:
        raise NonIntegrableError(
            f"{pot.family} family with exponent {pot.exponent} has infinite mass")


def _shell(pot, rho):
    """omega_{d-1} rho^{d-1} v(rho)^{-d}: radial density of the mass."""
    d = pot.dimension
    if rho <= 0.0:
        return unit_sphere_area(d) * math.exp(pot.radial_log_density(0.0)) if d == 1 else 0.0
    return unit_sphere_area(d) * math.exp((d - 1) * math.log(rho) + pot.radial_log_density(rho))


def radial_shell_density(pot, rho):
    return _shell(pot, float(rho))


def radial_cumulative(pot, r, tol=1e-12):
    """Mass of the ball B_r, integrated in u = rho/(1+rho)."""
    _check_integrable(pot)
    if r <= 0:
        return 0.0

    def f(u):
        om = 1.0 - u
        return _shell(pot, u / om) / (om * om)

    return _quad(f, 0.0, r / (1.0 + r), tol)


def radial_tail(pot, r, tol=1e-12):
    """Mass outside B_r, integrated in w = 1/(1+rho) to keep tiny tails accurate."""
    _check_integrable(pot)

    def f(w):
        if w <= 0.0:
            return 0.0
        return _shell(pot, (1.0 - w) / w) / (w * w)

    return _quad(f, 0.0, 1.0 / (1.0 + max(r, 0.0)), tol)


def _line_masses(pot, tol):
    """(lower(x), upper(x), pdf(x)) masses on the real line for d = 1 potentials."""
    if pot.radial:
        def pdf(x):
            return math.exp(pot.radial_log_density(abs(x)))

        def lower(x):
            if x <= 0:
                return radial_tail(pot, -x, tol) / 2
            return radial_cumulative(pot, x, tol) / 2 + radial_tail(pot, 0.0, tol) / 2

        def upper(x):
            if x >= 0:
                return radial_tail(pot, x, tol) / 2
            return radial_cumulative(pot, -x, tol) / 2 + radial_tail(pot, 0.0, tol) / 2

        return lower, upper, pdf

    def pdf(x):
        return float(pot.density(np.array([[x]]))[0])

    def lower(x):
        # x - t with t = w/(1-w), w in [0,1)
        return _quad(lambda w: pdf(x - w / (1 - w)) / (1 - w) ** 2 if w < 1 else 0.0, 0.0, 1.0, tol)

    def upper(x):
        return _quad(lambda w: pdf(x + w / (1 - w)) / (1 - w) ** 2 if w < 1 else 0.0, 0.0, 1.0, tol)

    return lower, upper, pdf


def line_masses(pot, tol=1e-12):
    if pot.dimension != 1:
        raise ValueError("line masses need d = 1")
    _check_integrable(pot)
    return _line_masses(pot, tol)


def _custom_mass_2d(pot, tol, r_in=0.0, r_out=math.inf):
    def integrand(w, theta):
        rho = w / (1 - w)
        x = np.array([[rho * math.cos(theta), rho * math.sin(theta)]])
        return float(pot.density(x)[0]) * rho / (1 - w) ** 2

    w0 = r_in / (1 + r_in)
    w1 = 1.0 if math.isinf(r_out) else r_out / (1 + r_out)
    val, _ = integrate.nquad(integrand, [[w0, w1], [0, 2 * math.pi]],
                             opts={"epsabs": 0.0, "epsrel": max(tol, 1e-10), "limit": 100})
    return val


def mass(pot, tol=DEFAULT_TOL):
    """Total mass of pot^{-d}, to relative accuracy ``tol``."""
    _check_integrable(pot)
    if pot.radial:
        return radial_cumulative(pot, 1.0, tol) + radial_tail(pot, 1.0, tol)
    if pot.dimension == 1:
        lower, upper, _ = _line_masses(pot, tol)
        return lower(0.0) + upper(0.0)
    if pot.dimension == 2:
        return _custom_mass_2d(pot, tol)
    raise NotImplementedError("custom potentials are integrated for d <= 2 only")


def ball_mass(pot, r, tol=DEFAULT_TOL):
    """Mass of pot^{-d} inside the closed ball B_r."""
    if pot.radial:
        return radial_cumulative(pot, r, tol)
    if pot.dimension == 1:
        lower, upper, _ = _line_masses(pot, tol)
        return mass(pot, tol) - lower(-r) - upper(r)
    if pot.dimension == 2:
        return _custom_mass_2d(pot, tol, 0.0, r)
    raise NotImplementedError("custom potentials are integrated for d <= 2 only")


def tail_mass(pot, r, tol=DEFAULT_TOL):
    """Mass of pot^{-d} outside B_r."""
    if pot.radial:
        return radial_tail(pot, r, tol)
    if pot.dimension == 1:
        lower, upper, _ = _line_masses(pot, tol)
        return lower(-r) + upper(r)
    if pot.dimension == 2:
        return _custom_mass_2d(pot, tol, r)
    raise NotImplementedError("custom potentials are integrated for d <= 2 only")


# ------------------------------------------------------------ pairs, scaling
@dataclass(frozen=True)
class DensityPair:
    """Source V and target W; ``normalized`` means both masses are 1 within tol."""

    source: Potential
    target: Potential
    normalized: bool = False

    def __post_init__(self):
        if self.source.dimension != self.target.dimension:
            raise ValueError("source and target dimensions differ")

    @property
    def dimension(self):
        return self.source.dimension

    @property
    def radial(self):
        return self.source.radial and self.target.radial

    def to_dict(self):
        return {"dimension": self.dimension, "source": self.source.to_dict(),
                "target": self.target.to_dict(), "normalized": self.normalized}

    @classmethod
    def from_dict(cls, data):
        d = data.get("dimension")
        src = dict(data["source"])
        tgt = dict(data["target"])
        if d is not None:
            src.setdefault("dimension", d)
            tgt.setdefault("dimension", d)
        return cls(Potential.from_dict(src), Potential.from_dict(tgt),
                   bool(data.get("normalized", False)))


def normalize_potential(pot, tol=DEFAULT_TOL):
    m = mass(pot, tol)
    return pot.scaled(m ** (1.0 / pot.dimension))


def normalize(pair, tol=DEFAULT_TOL):
    """Rescale V and W so that both V^{-d} and W^{-d} have unit mass.

    Scaling V by k scales the mass by k^{-d}, so k = mass^{1/d}.
    """
    return DensityPair(normalize_potential(pair.source, tol),
                       normalize_potential(pair.target, tol), True)


@dataclass(frozen=True)
class Truncation:
    """W_R = C_R W on B_R and +inf outside; C_R = (mass of W^{-d} on B_R)^{1/d}."""

    radius: float
    normalizer: float

    def inside(self, y):
        y = np.asarray(y, dtype=float)
        return np.linalg.norm(np.atleast_1d(y) if y.ndim == 0 else y, axis=-1) <= self.radius

    def value(self, target, y):
        y = np.asarray(y, dtype=float)
        v = self.normalizer * target.value(y)
        pts = target._as_points(y)
        return np.where(np.linalg.norm(pts, axis=-1) <= self.radius, v, np.inf)


def truncate(target, R, tol=DEFAULT_TOL):
    if R < 1:
        raise ValueError("truncation radius must be >= 1")
    inner = ball_mass(target, R, tol)
    return Truncation(float(R), inner ** (1.0 / target.dimension))
