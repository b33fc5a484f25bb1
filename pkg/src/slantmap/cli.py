"""Command-line entry point: ``slantmap analyze|check|verify|report``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .exprlang import ExprError
from .linalg import MetricError
from .runner import (EXIT_INPUT, REPORT_SCHEMA, RunReport, resolve_selection, run_analysis,
                     verify_builtin)
from .scenario import BUILTINS, ScenarioError, parse_override, parse_scenario


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="sampling seed (default: scenario value, 42)")
    p.add_argument("--points", type=int, help="number of sample points")
    p.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance by K")
    p.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")
    p.add_argument("--no-timestamp", action="store_true", help="omit timestamp and wall time")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                   help="override a scenario parameter (number or expression)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slantmap",
                                 description="Numerical checks for pointwise slant conformal maps.")
    sub = ap.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="run every check on a scenario file")
    a.add_argument("file")
    _common(a)
    c = sub.add_parser("check", help="run selected checks on a scenario file")
    c.add_argument("file")
    c.add_argument("--only", required=True, help="comma-separated check ids or prefixes")
    _common(c)
    v = sub.add_parser("verify", help="run a built-in example")
    v.add_argument("name", choices=BUILTINS)
    _common(v)
    r = sub.add_parser("report", help="report utilities")
    r.add_argument("--schema", action="store_true", help="print the JSON report schema")
    return ap


def _summary_lines(rep: RunReport) -> list[str]:
    d = rep.data
    lines = [f"scenario {d['scenario']}: {len(d['points'])} points analysed, "
             f"{len(d['skipped_points'])} skipped"]
    for c in d["checks"]:
        res = c["residual"]
        res = f"{res:.3e}" if isinstance(res, float) else str(res)
        lines.append(f"  {c['verdict']:<15} {c['id']:<32} residual {res}  tol {c['tolerance']:.1e}")
    for n in d["paper_notes"]:
        lines.append(f"  note {n['id']}: {n['summary']}")
    s = d["summary"]
    lines.append(f"passed {s['passed']}, failed {s['failed']}, not applicable {s['not_applicable']}"
                 f"; exit {s['exit_code']}" + (f" ({s['reason']})" if s.get("reason") else ""))
    return lines


def _emit(rep: RunReport, args) -> int:
    text = rep.text()
    if args.json == "-":
        sys.stdout.write(text)
    else:
        if args.json:
            Path(args.json).write_text(text, encoding="utf-8")
        print("\n".join(_summary_lines(rep)))
    return rep.exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        if not args.schema:
            print("report: nothing to do (use --schema)", file=sys.stderr)
            return EXIT_INPUT
        print(json.dumps(REPORT_SCHEMA, sort_keys=True, indent=2))
        return 0
    try:
        overrides = dict(parse_override(s) for s in args.set)
        if args.command == "verify":
            rep = verify_builtin(args.name, overrides or None, seed=args.seed, points=args.points,
                                 tol_scale=args.tol_scale, timestamp=not args.no_timestamp)
        else:
            path = Path(args.file)
            try:
                data = path.read_bytes()
            except OSError as exc:
                raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
            sc = parse_scenario(data, name=path.stem, overrides=overrides or None)
            if args.seed is not None:
                sc.seed = args.seed
            if args.points is not None:
                if args.points < 1:
                    raise ScenarioError("--points must be positive")
                sc.n_points = args.points
            selection = None
            if args.command == "check":
                selection = [s for s in args.only.split(",") if s.strip()]
                resolve_selection(selection)
            rep = run_analysis(sc, selection, tol_scale=args.tol_scale, timestamp=not args.no_timestamp)
    except (ScenarioError, ExprError, MetricError, ValueError) as exc:
        print(f"slantmap: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code = _emit(rep, args)
    if rep.data["summary"].get("reason"):
        print(f"slantmap: {rep.data['summary']['reason']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
