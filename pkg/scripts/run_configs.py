"""Run every experiment config through the CLI and merge the reports into one summary."""
import argparse
import pathlib
import sys

from otbounds.cli import main


def run(config_dir, out):
    codes = {}
    for cfg in sorted(pathlib.Path(config_dir).glob("*.json")):
        codes[cfg.name] = main(["run", "--config", str(cfg), "--out", str(out)])
        print(f"{cfg.name:<36} exit {codes[cfg.name]}", flush=True)
    runs = sorted(str(p) for p in pathlib.Path(out).iterdir() if (p / "report.json").exists())
    main(["report", *runs, "--out", str(pathlib.Path(out) / "summary")])
    return codes


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default="configs")
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()
    codes = run(args.configs, args.out)
    sys.exit(0 if all(c in (0, 3) for c in codes.values()) else 1)
