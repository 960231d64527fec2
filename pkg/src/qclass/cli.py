"""Command line front end: ``qclass run | audit | builtin``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report as rpt
from .errors import QClassError
from .scenario import BUILTINS, audit_scenario, builtin_text, load_builtin, load_scenario, run_scenario


def _load(target: str):
    if Path(target).exists() or target not in BUILTINS:
        return load_scenario(target)
    return load_builtin(target)


def _write(reports, fmt: str, out: str | None) -> None:
    if out is None:
        if fmt == "json":
            sys.stdout.write(rpt.to_json(reports))
        else:
            sys.stdout.write("\n".join(rpt.to_csv(r) for r in reports))
        return
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        (outdir / "report.json").write_text(rpt.to_json(reports))
    else:
        for r in reports:
            (outdir / f"{r['index']:02d}_{r['kind']}.csv").write_text(rpt.to_csv(r))


def _finish(reports) -> int:
    failed = rpt.failures(reports)
    if failed:
        sys.stderr.write(rpt.to_json({"failures": failed}))
        return 1
    return 0


def cmd_run(args) -> int:
    sc = _load(args.scenario)
    reports = run_scenario(sc, seed=args.seed)
    _write(reports, args.format, args.out)
    return _finish(reports)


def cmd_audit(args) -> int:
    sc = _load(args.scenario)
    result = audit_scenario(sc, seed=args.seed)
    for c in result["checks"]:
        status = "PASS" if c.passed else "FAIL"
        line = f"{status} {c.name} deviation={rpt.fmt(c.deviation)} tol={rpt.fmt(c.tol)}"
        if c.detail:
            line += f" ({c.detail})"
        print(line)
    return _finish([{"kind": "audit", "index": 0, **result}])


def cmd_builtin(args) -> int:
    sys.stdout.write(builtin_text(args.name))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qclass", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every request of a scenario and emit reports")
    run.add_argument("scenario", help="scenario JSON file, or the name of a builtin")
    run.add_argument("--out", help="write one file per request into this directory")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--seed", type=int, default=0, help="seed for randomized audit requests")
    run.set_defaults(func=cmd_run)

    aud = sub.add_parser("audit", help="run all consistency audits on a scenario's observables")
    aud.add_argument("scenario")
    aud.add_argument("--seed", type=int, default=0)
    aud.set_defaults(func=cmd_audit)

    bi = sub.add_parser("builtin", help="print a builtin scenario file")
    bi.add_argument("name", choices=BUILTINS)
    bi.set_defaults(func=cmd_builtin)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (QClassError, OSError) as exc:
        sys.stderr.write(f"qclass: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
