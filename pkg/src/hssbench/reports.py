"""Stable JSON and CSV serialization of result reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

import numpy as np

CSV_FIELDS = ("report", "quantity", "value", "std_error", "exact")


def _clean(obj):
    """JSON-safe copy: numpy to Python, non-finite floats to None, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def report_dict(report) -> dict:
    """Dictionary form tagged with the report type."""
    if isinstance(report, dict):
        out = dict(report)
        out.setdefault("type", "record")
        return _clean(out)
    if hasattr(report, "to_dict"):
        body = report.to_dict()
    elif is_dataclass(report):
        body = asdict(report)
    else:
        raise TypeError(f"cannot serialize {type(report).__name__}")
    return _clean({"type": type(report).__name__, **body})


def _flatten(prefix: str, obj, rows: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    elif isinstance(obj, bool) or obj is None or isinstance(obj, (int, float)):
        rows.append((prefix, obj))


def report_records(report) -> list[dict]:
    """One (quantity, value, std_error, exact) record per numeric leaf of a report."""
    d = report_dict(report)
    name = d.pop("type")
    if "value" in d and "std_error" in d:
        return [{"report": name, "quantity": d.get("quantity", name), "value": d["value"],
                 "std_error": d["std_error"], "exact": d.get("exact", "")}]
    exact = d.get("directionality") == "exact" if "directionality" in d else ""
    ses = {k[: -len("_std_error")]: v for k, v in d.items() if k.endswith("_std_error")}
    rows: list = []
    for key in sorted(d):
        if key.endswith("_std_error") or key in ("directionality",):
            continue
        _flatten(key, d[key], rows)
    out = []
    for quantity, value in rows:
        base = quantity[: -len("_hat")] if quantity.endswith("_hat") else quantity
        out.append({"report": name, "quantity": quantity, "value": value,
                    "std_error": ses.get(base, ""), "exact": exact})
    return out


def render_json(reports: Iterable) -> str:
    return json.dumps({"reports": [report_dict(r) for r in reports]}, indent=2, sort_keys=True,
                      allow_nan=False) + "\n"


def render_csv(reports: Iterable) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        for rec in report_records(r):
            writer.writerow({k: ("" if rec[k] is None else repr(rec[k]) if isinstance(rec[k], float) else rec[k])
                             for k in CSV_FIELDS})
    return buf.getvalue()


def emit_report(reports, format: str = "json", path=None) -> str:
    """Render reports as JSON or CSV; write to ``path`` when given and return the text."""
    reports = list(reports)
    if format == "json":
        text = render_json(reports)
    elif format == "csv":
        text = render_csv(reports)
    else:
        raise ValueError("format is 'json' or 'csv'")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
