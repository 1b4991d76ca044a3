"""Measured growth and Lipschitz behaviour of computed maps versus certificates.

A "map source" is anything with ``map_points(x)`` (x of shape (..., d)) and a
``horizon``: RadialProfile, Profile1D, MapSample, or the adapters below.
"""
import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import KindMismatch, RadiusOutOfRange
from .sampling import sphere_directions

SCHEMA = 1
DEFAULT_SLACK = 0.02
CSV_COLUMNS = ["radius", "ratio", "envelope", "certificate", "verdict"]


@dataclass(frozen=True)
class Envelope:
    """(1+|x|)^exponent for kind "power", sqrt(1+log(1+|x|)) for kind "sqrt-log"."""

    kind: str = "power"
    exponent: Optional[float] = 1.0

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == "power":
            return (1.0 + r) ** self.exponent
        if self.kind == "sqrt-log":
            return np.sqrt(1.0 + np.log1p(r))
        raise ValueError(f"unknown envelope kind {self.kind!r}")

    @classmethod
    def of(cls, cert):
        return cls(cert.envelope_kind, cert.exponent)


@dataclass
class Verdict:
    status: str                 # pass | fail | not-applicable
    margin: Optional[float]
    measured: Optional[float]
    certificate: Optional[float]
    slack: float
    notes: list = field(default_factory=list)

    def to_dict(self):
        return _clean(asdict(self))


@dataclass
class GrowthReport:
    exponent: Optional[float]
    envelope_kind: str
    radii: list
    ratios: list
    supremum: float
    certificate: Optional[float] = None
    verdict: Optional[Verdict] = None
    empirical_exponent: Optional[float] = None
    trend: Optional[float] = None
    kind: str = "growth"

    def to_dict(self):
        out = {k: getattr(self, k) for k in ("kind", "exponent", "envelope_kind", "radii", "ratios",
                                             "supremum", "certificate", "empirical_exponent", "trend")}
        out["verdict"] = None if self.verdict is None else self.verdict.to_dict()
        return _clean(out)


@dataclass
class LipschitzReport:
    eps_list: list
    quotients: list             # per eps: max over (x, e) of delta(eps)/eps
    supremum: float             # sampled sup over all (x, e, eps)
    closed_form: Optional[float] = None
    closed_form_dominates: Optional[bool] = None
    certificate: Optional[float] = None
    verdict: Optional[Verdict] = None
    n_points: int = 0
    n_directions: int = 0
    kind: str = "lipschitz"

    @property
    def measured(self):
        return self.supremum if self.closed_form is None else max(self.supremum, self.closed_form)

    def to_dict(self):
        out = {k: getattr(self, k) for k in ("kind", "eps_list", "quotients", "supremum", "closed_form",
                                             "closed_form_dominates", "certificate", "n_points",
                                             "n_directions")}
        out["measured"] = self.measured
        out["verdict"] = None if self.verdict is None else self.verdict.to_dict()
        return _clean(out)


def _clean(obj):
    """Replace non-finite floats by None so the JSON is strict."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ------------------------------------------------------------ measurement
def _directions(d, n_directions):
    return sphere_directions(d, n_directions)


def measure_growth(map_source, envelope, radii, n_directions=16):
    """Per-radius max over directions of |T(r e)| / envelope(r), and the supremum."""
    radii = np.asarray(radii, dtype=float)
    horizon = getattr(map_source, "horizon", math.inf)
    if np.any(radii > horizon * (1 + 1e-12)):
        raise RadiusOutOfRange(f"radii exceed the map range {horizon:g}")
    d = map_source.dimension
    dirs = _directions(d, n_directions)
    pts = radii[:, None, None] * dirs[None, :, :]
    T = map_source.map_points(pts)
    norms = np.linalg.norm(T, axis=-1).max(axis=1)
    ratios = norms / envelope(radii)
    return GrowthReport(envelope.exponent, envelope.kind, radii.tolist(), ratios.tolist(),
                        float(np.max(ratios)) if len(ratios) else 0.0,
                        empirical_exponent=empirical_exponent(radii, norms),
                        trend=decade_trend(radii, ratios))


def measure_lipschitz(map_source, eps_list, radii, n_directions=16):
    """Sup of delta(eps)/eps = (T(x+eps e) - T(x-eps e)).e / (2 eps) over the sample.

    Points are radii x directions; directions e come from the same sphere set.
    For radial and 1-D profiles the closed-form max(t', t/r) over the profile
    nodes is recorded as well.
    """
    radii = np.asarray(radii, dtype=float)
    d = map_source.dimension
    dirs = _directions(d, n_directions)
    horizon = getattr(map_source, "horizon", math.inf)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    quot = []
    for eps in eps_list:
        ok = np.linalg.norm(pts, axis=-1) + eps <= horizon * (1 + 1e-12)
        P = pts[ok]
        if len(P) == 0:
            raise RadiusOutOfRange(f"no sample point fits inside the map range at eps={eps:g}")
        xp = P[:, None, :] + eps * dirs[None, :, :]
        xm = P[:, None, :] - eps * dirs[None, :, :]
        delta = np.sum((map_source.map_points(xp) - map_source.map_points(xm)) * dirs[None, :, :], axis=-1) / 2
        quot.append(float(np.max(delta / eps)))
    sup = float(max(quot))
    closed = closed_form_lipschitz(map_source)
    dominates = None if closed is None else bool(sup <= closed * (1 + 1e-6) + 1e-12)
    return LipschitzReport(list(map(float, eps_list)), quot, sup, closed, dominates,
                           n_points=len(pts), n_directions=len(dirs))


def closed_form_lipschitz(map_source):
    """max over the profile of the DT eigenvalues, when the map is a profile."""
    if hasattr(map_source, "r") and hasattr(map_source, "slope"):
        r = map_source.r
        fine = np.unique(np.concatenate([r, 0.5 * (r[1:] + r[:-1])]))
        return float(max(np.max(map_source.derivative(fine)), np.max(map_source.ratio(fine))))
    if hasattr(map_source, "x") and hasattr(map_source, "slope"):
        x = map_source.x
        fine = np.unique(np.concatenate([x, 0.5 * (x[1:] + x[:-1])]))
        return float(np.max(map_source.derivative(fine)))
    return None


def empirical_exponent(radii, norms, lo=None, hi=None):
    """Least-squares slope of log|T| against log|x| over the last decade of radii (default)."""
    radii = np.asarray(radii, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if len(radii) < 2:
        return None
    hi = radii.max() if hi is None else hi
    lo = hi / 10 if lo is None else lo
    m = (radii >= lo * (1 - 1e-12)) & (radii <= hi * (1 + 1e-12)) & (norms > 0) & (radii > 0)
    if len(np.unique(radii[m])) < 2:
        return None
    return float(np.polyfit(np.log(radii[m]), np.log(norms[m]), 1)[0])


def decade_trend(radii, ratios):
    """max of the ratios over the last decade / max over the first decade of the sample."""
    radii = np.asarray(radii, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    pos = radii > 0
    if pos.sum() < 2:
        return None
    lo, hi = radii[pos].min(), radii[pos].max()
    if hi < 10 * lo * (1 - 1e-12):
        return None
    first = pos & (radii <= 10 * lo * (1 + 1e-12))
    last = pos & (radii >= hi / 10 * (1 - 1e-12))
    base = np.max(ratios[first])
    return float(np.max(ratios[last]) / base) if base > 0 else None


# ----------------------------------------------------------------- verdict
def verify(certificate, report, slack=DEFAULT_SLACK, hypotheses_ok=True, reason=None):
    """Pass iff measured <= certificate * (1 + slack); margin = certificate / measured."""
    if getattr(certificate, "kind", None) != report.kind:
        raise KindMismatch(f"{getattr(certificate, 'kind', None)} certificate against {report.kind} report")
    measured = report.measured if report.kind == "lipschitz" else report.supremum
    value = certificate.value
    notes = []
    if not hypotheses_ok:
        v = Verdict("not-applicable", None, measured, value, slack,
                    [reason or "hypotheses violated; certificate not issued"])
    elif value is None:
        v = Verdict("not-applicable", None, measured, None, slack,
                    [reason or "certificate has no calibrated constant"])
    else:
        margin = value / measured if measured > 0 else math.inf
        status = "pass" if measured <= value * (1 + slack) else "fail"
        v = Verdict(status, margin, measured, value, slack, notes)
    report.certificate = value
    report.verdict = v
    return v


EXPONENT_TOL = 0.1
TREND_TOL = 1.05


def verify_order(certificate, report):
    """Growth-order check for certificates whose constant is calibrated.

    Power envelopes: the empirical exponent over the last decade must not
    exceed the certified exponent by more than EXPONENT_TOL.  The sqrt-log
    envelope: the last-decade / first-decade ratio trend must stay below
    TREND_TOL.  A failed check turns the verdict into "fail".
    """
    v = report.verdict
    if v is None or v.status == "not-applicable":
        return v
    if certificate.envelope_kind == "power":
        e = report.empirical_exponent
        ok = e is not None and e <= certificate.exponent + EXPONENT_TOL
        v.notes.append(f"empirical exponent {e!r} vs certified {certificate.exponent!r} (tol {EXPONENT_TOL})")
    else:
        t = report.trend
        ok = t is not None and t <= TREND_TOL
        v.notes.append(f"decade trend {t!r} (tol {TREND_TOL})")
    if not ok:
        v.status = "fail"
    return v


# ------------------------------------------------------------------ output
def _csv_rows(report):
    verdict = "" if report.verdict is None else report.verdict.status
    cert = "" if report.certificate is None else repr(float(report.certificate))
    if report.kind == "growth":
        env = Envelope(report.envelope_kind, report.exponent)
        rows = [[repr(float(r)), repr(float(q)), repr(float(env(r))), cert, verdict]
                for r, q in zip(report.radii, report.ratios)]
        rows.append(["sup", repr(float(report.supremum)), report.envelope_kind, cert, verdict])
        return rows
    rows = [[f"eps={e!r}", repr(float(q)), "lipschitz", cert, verdict]
            for e, q in zip(report.eps_list, report.quotients)]
    rows.append(["sup", repr(float(report.measured)), "lipschitz", cert, verdict])
    return rows


def emit_report(reports, path, fmt="json", provenance=None):
    """Write reports as JSON (schema 1, with provenance) or CSV (fixed columns); return the path."""
    if fmt == "json":
        doc = {"schema": SCHEMA, "provenance": _clean(provenance or {}),
               "reports": [r.to_dict() for r in reports]}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in reports:
                w.writerows(_csv_rows(r))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def report_from_dict(data):
    v = data.get("verdict")
    verdict = None if v is None else Verdict(v["status"], v["margin"], v["measured"], v["certificate"],
                                             v["slack"], v.get("notes", []))
    if data["kind"] == "growth":
        return GrowthReport(data["exponent"], data["envelope_kind"], data["radii"], data["ratios"],
                            data["supremum"], data["certificate"], verdict, data["empirical_exponent"],
                            data["trend"])
    return LipschitzReport(data["eps_list"], data["quotients"], data["supremum"], data["closed_form"],
                           data["closed_form_dominates"], data["certificate"], verdict,
                           data.get("n_points", 0), data.get("n_directions", 0))


class LinearMap:
    """T(x) = M x, a reference map for checks."""

    def __init__(self, matrix, horizon=math.inf):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.dimension = self.matrix.shape[0]
        self.horizon = horizon

    def map_points(self, x):
        x = np.asarray(x, dtype=float)
        if self.dimension == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return x @ self.matrix.T
