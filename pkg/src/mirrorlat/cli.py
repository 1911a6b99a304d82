"""Command-line front end: one subcommand per scenario.

    mirrorlat <scenario> --config cfg.yaml [--seed N] [--out DIR]
                         [--chains N] [--format csv|json]

Writes ``report.json`` (the full run report) into the output directory and,
with the csv format, the tabular artifacts: ``verdicts.csv`` plus
``curve.csv`` / ``matrix.csv`` / ``orientations.csv`` where applicable.
Exit codes: 0 all checks pass, 1 a verdict failed, 2 config error,
3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .scenarios import SCENARIOS, ConfigError, parse_config, run_scenario


def _write_csv(path: Path, rows, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_artifacts(report: dict, out_dir: Path, fmt: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    if fmt != "csv":
        return
    if "verdicts" in report:
        rows = [{"check": v["check"], "status": v["status"],
                 "margin": "" if v["margin"] is None else repr(v["margin"]),
                 "z_score": "" if v["z_score"] is None else repr(v["z_score"])}
                for v in report["verdicts"]]
        _write_csv(out_dir / "verdicts.csv", rows,
                   ["check", "status", "margin", "z_score"])
    if "curve" in report:
        _write_csv(out_dir / "curve.csv", report["curve"],
                   ["separation", "energy_mean", "energy_stderr", "n_samples"])
    if "matrix" in report:
        _write_csv(out_dir / "matrix.csv", report["matrix"],
                   ["i", "j", "energy_mean", "energy_stderr", "n_samples"])
    if "table" in report:
        _write_csv(out_dir / "orientations.csv", report["table"],
                   ["angle", "energy"])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mirrorlat",
        description="mirror-pair lattice laboratory: positivity, Casimir "
                    "inequality and torque scenarios")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML scenario config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--chains", type=int, default=None,
                       help="override mc.chains")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="override output.format")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(Path(args.config).read_text())
        if cfg.get("scenario") is None:
            cfg["scenario"] = args.scenario
        elif cfg["scenario"] != args.scenario:
            raise ConfigError(f"config declares scenario {cfg['scenario']!r} "
                              f"but the subcommand is {args.scenario!r}")
        if args.seed is not None:
            cfg["mc"]["seed"] = args.seed
            cfg["functionals"]["seed"] = args.seed
        if args.chains is not None:
            cfg["mc"]["chains"] = args.chains
        if args.format is not None:
            cfg["output"]["format"] = args.format
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        report = run_scenario(cfg)
        write_artifacts(report, Path(args.out), cfg["output"]["format"])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:                     # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    n_fail = report.get("n_fail", 0)
    print(f"{args.scenario}: {report.get('n_pass', 0)} pass, {n_fail} fail, "
          f"{report.get('n_inconclusive', 0)} inconclusive "
          f"({report['wall_clock_s']:.1f}s)")
    return 1 if n_fail else 0


if __name__ == "__main__":
    sys.exit(main())
