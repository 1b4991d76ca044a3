"""Command line entry point: ``otbounds {run,hypotheses,certify,solve,verify,report}``.

Exit codes: 0 pass, 2 verification failure, 3 hypothesis violation,
4 solver failure, 5 config error.
"""
import argparse
import csv
import json
import os
import sys
import time
from dataclasses import replace

from . import __version__
from .config import load_config
from .errors import (BracketError, ConfigError, OTBoundsError, QuadratureError, SolverError,
                     TailTooHeavy)
from .hypotheses import HypothesisReport
from .pipeline import overall_status, run_certify, run_hypotheses, run_solve, run_verify
from .verification import emit_report

EXIT_PASS, EXIT_VERIFY, EXIT_HYPOTHESIS, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3, 4, 5


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _read_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError:
        raise ConfigError(what, f"missing input file {path}") from None


def _run_dir(args, cfg):
    base = args.out if args.out else cfg.out_dir
    path = os.path.join(base, cfg.run_id)
    os.makedirs(path, exist_ok=True)
    return path


def _metadata(path, argv):
    _write_json(os.path.join(path, "metadata.json"),
                {"created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "version": __version__,
                 "argv": list(argv)})


def _fail(stage, message):
    print(f"[{stage}] {message}", file=sys.stderr)


def _stage_hypotheses(cfg, pair, out, emit_witness):
    hyp = run_hypotheses(cfg, pair)
    _write_json(os.path.join(out, "hypotheses.json"), hyp.to_dict(emit_witness))
    return hyp


def _stage_solve(cfg, pair, out, solver=None):
    try:
        doc = run_solve(cfg, pair, solver)
    except (SolverError, TailTooHeavy, BracketError, QuadratureError) as exc:
        info = {"error": str(exc)}
        if isinstance(exc, SolverError):
            info["trace"] = exc.trace
        _write_json(os.path.join(out, "solve_error.json"), info)
        raise
    _write_json(os.path.join(out, "map.json"), doc)
    return doc


def _stage_verify(cfg, pair, certs, map_doc, hyp, out, slack):
    reports, calibrated = run_verify(cfg, certs, map_doc, hyp, slack)
    status = overall_status(reports)
    provenance = {"run_id": cfg.run_id, "config": cfg.to_dict(),
                  "hypotheses": None if hyp is None else hyp.to_dict(),
                  "certificates": certs, "calibrated_growth_certificate": calibrated,
                  "solver": map_doc.get("solver"), "solver_info": map_doc.get("info", {}),
                  "status": status, "slack": cfg.slack if slack is None else slack}
    emit_report(reports, os.path.join(out, "report.json"), "json", provenance)
    emit_report(reports, os.path.join(out, "report.csv"), "csv")
    return reports, status


def _verdict_exit(reports, status):
    if status == "fail":
        first = next(r for r in reports if r.verdict.status == "fail")
        _fail("verify", f"{first.kind} measured {first.verdict.measured:.6g} exceeds certificate "
                        f"{first.verdict.certificate:.6g}")
        return EXIT_VERIFY
    return EXIT_PASS


def cmd_run(args):
    cfg = _load(args)
    pair = cfg.density_pair()
    out = _run_dir(args, cfg)
    hyp = _stage_hypotheses(cfg, pair, out, args.emit_witness)
    certs = run_certify(cfg, pair, hyp)
    _write_json(os.path.join(out, "certificates.json"), certs)
    if not hyp.ok:
        _fail("hypotheses", f"{hyp.violation['message']} at {hyp.violation['witness']}")
        _metadata(out, sys.argv)
        return EXIT_HYPOTHESIS
    try:
        map_doc = _stage_solve(cfg, pair, out)
    except OTBoundsError as exc:
        _fail("solve", str(exc))
        _metadata(out, sys.argv)
        return EXIT_SOLVER
    reports, status = _stage_verify(cfg, pair, certs, map_doc, hyp, out, args.slack)
    _metadata(out, sys.argv)
    return _verdict_exit(reports, status)


def cmd_hypotheses(args):
    cfg = _load(args)
    out = _run_dir(args, cfg)
    hyp = _stage_hypotheses(cfg, cfg.density_pair(), out, args.emit_witness)
    if not hyp.ok:
        _fail("hypotheses", f"{hyp.violation['message']} at {hyp.violation['witness']}")
        return EXIT_HYPOTHESIS
    return EXIT_PASS


def cmd_certify(args):
    cfg = _load(args)
    out = _run_dir(args, cfg)
    hyp_path = args.hypotheses or os.path.join(out, "hypotheses.json")
    hyp = HypothesisReport.from_dict(_read_json(hyp_path, "--hypotheses"))
    certs = run_certify(cfg, cfg.density_pair(), hyp)
    _write_json(os.path.join(out, "certificates.json"), certs)
    return EXIT_PASS if certs["issued"] else EXIT_HYPOTHESIS


def cmd_solve(args):
    cfg = _load(args)
    if args.solver:
        cfg = replace(cfg, solver=args.solver)
    out = _run_dir(args, cfg)
    try:
        _stage_solve(cfg, cfg.density_pair(), out)
    except OTBoundsError as exc:
        _fail("solve", str(exc))
        return EXIT_SOLVER
    return EXIT_PASS


def cmd_verify(args):
    cfg = _load(args)
    out = _run_dir(args, cfg)
    certs = _read_json(args.certificates or os.path.join(out, "certificates.json"), "--certificates")
    map_doc = _read_json(args.map or os.path.join(out, "map.json"), "--map")
    hyp_path = args.hypotheses or os.path.join(out, "hypotheses.json")
    hyp = HypothesisReport.from_dict(_read_json(hyp_path, "--hypotheses")) if os.path.exists(hyp_path) else None
    if map_doc.get("solver") and map_doc["solver"] != cfg.solver:
        cfg = replace(cfg, solver=map_doc["solver"])
    reports, status = _stage_verify(cfg, cfg.density_pair(), certs, map_doc, hyp, out, args.slack)
    return _verdict_exit(reports, status)


SUMMARY_COLUMNS = ["run_id", "theorem", "solver", "status", "kind", "measured", "certificate", "margin",
                   "verdict"]


def summarize(run_dirs):
    rows = []
    for d in run_dirs:
        doc = _read_json(os.path.join(d, "report.json"), "report")
        prov = doc.get("provenance", {})
        cfg = prov.get("config", {})
        for rep in doc.get("reports", []):
            v = rep.get("verdict") or {}
            rows.append({"run_id": prov.get("run_id", os.path.basename(d)), "theorem": cfg.get("theorem"),
                         "solver": prov.get("solver"), "status": prov.get("status"), "kind": rep["kind"],
                         "measured": v.get("measured"), "certificate": v.get("certificate"),
                         "margin": v.get("margin"), "verdict": v.get("status")})
    rows.sort(key=lambda r: (str(r["run_id"]), r["kind"]))
    return rows


def cmd_report(args):
    rows = summarize(args.runs)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    _write_json(os.path.join(out, "summary.json"), {"schema": 1, "rows": rows})
    for r in rows:
        print(f"{r['run_id']:<24} {r['kind']:<10} {r['verdict']:<15} measured={r['measured']} "
              f"certificate={r['certificate']}")
    return EXIT_VERIFY if any(r["verdict"] == "fail" for r in rows) else EXIT_PASS


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "slack", None) is not None:
        cfg = replace(cfg, slack=args.slack)
    return cfg


def build_parser():
    p = argparse.ArgumentParser(prog="otbounds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, slack=True):
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
        sp.add_argument("--out", help="output directory (default: config out_dir)")
        if slack:
            sp.add_argument("--slack", type=float, default=None, help="verification slack")

    sp = sub.add_parser("run", help="hypotheses, certify, solve and verify")
    common(sp)
    sp.add_argument("--emit-witness", action="store_true", help="include witness grids in hypotheses.json")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("hypotheses", help="certify the hypothesis system")
    common(sp, slack=False)
    sp.add_argument("--emit-witness", action="store_true")
    sp.set_defaults(func=cmd_hypotheses)

    sp = sub.add_parser("certify", help="certificates from a saved hypothesis report")
    common(sp, slack=False)
    sp.add_argument("--hypotheses", help="hypotheses.json (default: in the run directory)")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("solve", help="compute the transport map")
    common(sp, slack=False)
    sp.add_argument("--solver", choices=("oracle-1d", "oracle-radial", "entropic"))
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="measure a saved map against saved certificates")
    common(sp)
    sp.add_argument("--certificates")
    sp.add_argument("--map")
    sp.add_argument("--hypotheses")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="merge run reports into one summary table")
    sp.add_argument("runs", nargs="+", help="run directories")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _fail("config", str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
