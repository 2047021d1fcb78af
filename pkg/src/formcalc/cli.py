"""Command line front end.

``formcalc run <file> [--jobs N] [--out DIR]`` executes a scenario file
and writes one JSON report per scenario plus a summary.  ``formcalc
suite <name> [--seed S] [--out DIR]`` runs a named verification battery
(or ``all``).  The environment variable ``FORMCALC_TOL_SCALE`` scales
every tolerance (default 1.0).

Exit codes: 0 all pass, 2 a claim failed, 3 something was uncertifiable,
4 parse errors or unknown operations.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .reporting import FAIL, PASS, SCHEMA_VERSION, UNCERTIFIED, write_csv, write_report
from .scenarios import UnknownOperation, run_scenario
from .suites import SUITE_NAMES, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_UNCERTIFIED, EXIT_USAGE = 0, 2, 3, 4


def _tol_scale() -> float:
    try:
        return float(os.environ.get("FORMCALC_TOL_SCALE", "1.0"))
    except ValueError:
        return 1.0


def _exit_code(verdicts) -> int:
    if any(v == FAIL for v in verdicts):
        return EXIT_FAIL
    if any(v == UNCERTIFIED for v in verdicts):
        return EXIT_UNCERTIFIED
    return EXIT_PASS


def cmd_run(args) -> int:
    path = Path(args.file)
    try:
        payload = json.loads(path.read_text())
        scenarios = payload["scenarios"]
        if not isinstance(scenarios, list):
            raise ValueError("scenarios must be a list")
        for sc in scenarios:
            if "op" not in sc:
                raise ValueError("every scenario needs an op")
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: cannot read scenario file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    tol_scale = _tol_scale()
    try:
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                reports = list(pool.map(
                    lambda sc: run_scenario(sc, tol_scale), scenarios))
        else:
            reports = [run_scenario(sc, tol_scale) for sc in scenarios]
    except UnknownOperation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    reports.sort(key=lambda r: r.scenario)
    for rep in reports:
        print(f"{rep.verdict:11s} {rep.scenario}")
    code = _exit_code([r.verdict for r in reports])
    summary = {
        "schema": SCHEMA_VERSION,
        "scenarios": [r.as_dict(with_time=False) for r in reports],
        "counts": {"total": len(reports),
                   "passed": sum(r.verdict == PASS for r in reports),
                   "failed": sum(r.verdict == FAIL for r in reports),
                   "uncertified": sum(r.verdict == UNCERTIFIED
                                      for r in reports)},
        "exit_code": code,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for rep in reports:
            write_report(rep, out / f"{rep.scenario}.json")
            for name, (header, rows) in rep.details.get("csv", {}).items():
                write_csv(out / f"{rep.scenario}-{name}", header, rows)
        (out / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{summary['counts']['passed']}/{summary['counts']['total']} passed")
    return code


def cmd_suite(args) -> int:
    if args.name != "all" and args.name not in SUITE_NAMES:
        print(f"error: unknown suite {args.name!r} (choose from "
              f"{', '.join(SUITE_NAMES + ('all',))})", file=sys.stderr)
        return EXIT_USAGE
    res = run_suite(args.name, seed=args.seed, tol_scale=_tol_scale())
    for rep in res.reports:
        mark = "control" if rep.control else "claim"
        print(f"{rep.verdict:11s} [{mark}] {rep.scenario}")
    summary = res.summary_dict()
    missing = [k for k, v in res.coverage().items() if v == 0]
    if args.name == "all":
        summary["coverage_complete"] = not missing
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for rep in res.reports:
            write_report(rep, out / f"{rep.scenario}.json")
        for name, (header, rows) in res.artifacts.items():
            write_csv(out / name, header, rows)
        (out / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
    counts = summary["counts"]
    print(f"{counts['passed']}/{counts['total']} passed, "
          f"{counts['controls']} controls")
    if args.name == "all" and missing:
        print(f"coverage incomplete: {missing}", file=sys.stderr)
        return EXIT_FAIL
    if not res.ok:
        unexpected = [r for r in res.reports if not r.as_expected]
        if any(r.verdict == UNCERTIFIED for r in unexpected):
            return EXIT_UNCERTIFIED
        return EXIT_FAIL
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formcalc",
        description="scenario-driven verification of positive-form calculus")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("file")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(fn=cmd_run)
    p_suite = sub.add_parser("suite", help="run a verification battery")
    p_suite.add_argument("name")
    p_suite.add_argument("--seed", type=int, default=0)
    p_suite.add_argument("--out", default=None)
    p_suite.set_defaults(fn=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
