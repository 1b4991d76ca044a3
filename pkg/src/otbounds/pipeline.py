"""Stages of an experiment: hypotheses -> certify -> solve -> verify.

Each stage takes plain objects and returns JSON-ready documents, so running the
stages one by one from saved files gives the same result as a single run.
"""
import numpy as np

from . import bounds
from .entropic import MapSample, default_schedule, discretize, extract_map, solve_entropic
from .hypotheses import CurvatureConstants, GrowthConstants, RatioConstants, certify_system
from .oracle import default_radial_grid, line_map, profile_from_dict, radial_map
from .verification import Envelope, Verdict, measure_growth, measure_lipschitz, verify, verify_order

LIPSCHITZ_SYSTEMS = ("thm-1.2", "thm-3.1")


def run_hypotheses(cfg, pair):
    h = cfg.hypotheses
    return certify_system(cfg.theorem, pair, cfg.grid, cfg.asymptotic, h.radius, h.p, h.q, h.r0,
                          h.r0_asym)


def run_certify(cfg, pair, hyp):
    """Certificates (as dicts) from a hypothesis report."""
    if not hyp.ok:
        return {"issued": False, "reason": hyp.violation["message"] if hyp.violation else "violated"}
    c = hyp.constants
    out = {"issued": True}
    if cfg.theorem in ("thm-1.1", "thm-1.2", "thm-3.1"):
        gc = GrowthConstants(**c["growth"])
        a_g = bounds.cone_mass(pair.target)
        xs = bounds.xstar_bound(pair.source, a_g)
        lin = bounds.linear_growth_certificate(gc, c["lip_root"], a_g, xs)
        out["growth"] = lin.to_dict()
        if cfg.theorem in LIPSCHITZ_SYSTEMS:
            rc = RatioConstants(**c["ratios"])
            cc = CurvatureConstants(**c["curvature"])
            out["lipschitz"] = bounds.lipschitz_certificate(rc, cc, lin.C).to_dict()
    elif cfg.theorem == "thm-2.2":
        s = c["sublinear"]
        out["growth"] = bounds.sublinear_certificate(pair.dimension, s["p"], s["q"]).to_dict()
    elif cfg.theorem == "thm-2.3":
        out["growth"] = bounds.gaussian_certificate(c["gauss_A"]).to_dict()
    return out


def run_solve(cfg, pair, solver=None):
    """Map document: {"map": ..., "info": ...}."""
    solver = solver or cfg.solver
    if solver == "oracle-1d":
        prof = line_map(pair, cfg.profile.horizon, cfg.profile.n_nodes // 2, tol=cfg.profile.tol)
        return {"solver": solver, "map": prof.to_dict(), "info": {}}
    if solver == "oracle-radial":
        grid = default_radial_grid(cfg.profile.horizon, cfg.profile.n_nodes)
        prof = radial_map(pair, grid, cfg.profile.tol)
        return {"solver": solver, "map": prof.to_dict(), "info": {}}
    e = cfg.entropic
    src, tgt = discretize(pair, e.half_width, e.n)
    sched = default_schedule(src, tgt, e.steps_per_decade)
    plan = solve_entropic(src, tgt, sched, e.tol, e.max_iter)
    sample = extract_map(plan)
    info = {"trace": plan.trace, "marginal_error": plan.marginal_error,
            "source_marginal_error": plan.source_marginal_error, "eps": plan.eps,
            "source_tail_mass": src.tail_mass, "target_tail_mass": tgt.tail_mass,
            "target_support_radius": tgt.support_radius}
    return {"solver": solver, "map": sample.to_dict(), "info": info}


def map_from_document(doc):
    m = doc["map"]
    if m["kind"] == "grid":
        return MapSample.from_dict(m)
    return profile_from_dict(m)


def _radii(cfg, the_map):
    v = cfg.verification
    r_max = v.r_max if v.r_max is not None else the_map.horizon
    return np.geomspace(v.r_min, r_max, v.n_radii)


def run_verify(cfg, certs, map_doc, hyp=None, slack=None):
    """Measurement reports with verdicts; returns (reports, summary)."""
    slack = cfg.slack if slack is None else slack
    the_map = map_from_document(map_doc)
    radii = _radii(cfg, the_map)
    v = cfg.verification
    hyp_ok = True if hyp is None else hyp.ok
    reason = None if hyp_ok else "hypotheses violated"
    reports = []
    issued = certs.get("issued", False)
    if issued:
        gcert = bounds.certificate_from_dict(certs["growth"])
        env = Envelope.of(gcert)
    else:
        gcert, env = None, Envelope("power", 1.0)
    grep = measure_growth(the_map, env, radii, v.n_directions)
    order_only = gcert is not None and gcert.value is None
    if order_only:
        gcert = bounds.calibrate(gcert, grep.radii, grep.ratios)
    if gcert is not None:
        verify(gcert, grep, slack)
        if order_only:
            verify_order(gcert, grep)
    else:
        grep.verdict = Verdict("not-applicable", None, grep.supremum, None, slack, [reason or "no certificate"])
    reports.append(grep)
    if cfg.theorem in LIPSCHITZ_SYSTEMS:
        lrep = measure_lipschitz(the_map, v.eps_list, radii, v.n_directions)
        if issued:
            verify(bounds.certificate_from_dict(certs["lipschitz"]), lrep, slack)
        else:
            lrep.verdict = Verdict("not-applicable", None, lrep.measured, None, slack,
                                   [reason or "no certificate"])
        reports.append(lrep)
    calibrated = None if gcert is None else gcert.to_dict()
    return reports, calibrated


def overall_status(reports):
    statuses = [r.verdict.status for r in reports]
    if "fail" in statuses:
        return "fail"
    if statuses and all(s == "not-applicable" for s in statuses):
        return "not-applicable"
    return "pass"
