"""Byte-deterministic rendering of reports as JSON or CSV."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict

import numpy as np

from .audit import Check


def fmt(x) -> str:
    """17 significant digits; negative zero printed as zero."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x) + 0.0, ".17g")


def _plain(obj):
    if isinstance(obj, Check):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return fmt(obj)


def to_json(obj, indent: int = 2) -> str:
    return _emit(_plain(obj), indent, 0) + "\n"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def to_csv(report: dict) -> str:
    """One request's report: a header comment, its table or scalar fields,
    then its checks."""
    head = f"# request {report.get('index', 0)}: {report['kind']}"
    if "state" in report:
        head += f" state={report['state']}"
    parts = [head + "\n"]
    if "columns" in report:
        parts.append(_csv_text([report["columns"]] + report["rows"]))
    else:
        skip = {"kind", "state", "index", "checks", "observables", "audited", "negative_atoms", "constraints"}
        scalars = [[k, v] for k, v in report.items() if k not in skip]
        if scalars:
            parts.append(_csv_text([["quantity", "value"]] + scalars))
        if report.get("negative_atoms"):
            parts.append("# negative atoms\n")
            parts.append(_csv_text(report["negative_atoms"]))
    if report["checks"]:
        parts.append("# checks\n")
        parts.append(
            _csv_text(
                [["check", "passed", "deviation", "tol"]]
                + [[c.name, "pass" if c.passed else "fail", c.deviation, c.tol] for c in report["checks"]]
            )
        )
    return "".join(parts)


def failures(reports) -> list:
    out = []
    for r in reports:
        for c in r["checks"]:
            if not c.passed:
                out.append({"request": r.get("index"), "kind": r["kind"], "check": c.name,
                            "deviation": c.deviation, "tol": c.tol, "detail": c.detail})
    return out
