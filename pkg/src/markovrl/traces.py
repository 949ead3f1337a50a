"""Trace records and their CSV/JSON serialization.

Floats are written with ``repr`` so that identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class TraceRecord:
    t: int
    metrics: dict = field(default_factory=dict)


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def trace_to_csv(records, columns) -> str:
    """Render records as CSV; ``columns[0]`` must be ``"t"``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    last = None
    for rec in records:
        if last is not None and rec.t <= last:
            raise ValueError(f"trace times must increase strictly ({last} then {rec.t})")
        last = rec.t
        w.writerow([rec.t] + [_fmt(rec.metrics.get(c, float("nan"))) for c in columns[1:]])
    return buf.getvalue()


def write_trace_csv(path, records, columns):
    with open(path, "w", newline="") as fh:
        fh.write(trace_to_csv(records, columns))


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        TraceRecord(int(r.pop("t")), {k: float(v) for k, v in r.items()})
        for r in rows
    ]


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
