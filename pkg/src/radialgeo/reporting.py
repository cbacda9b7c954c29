"""Deterministic JSON/CSV emission for reports and plot grids.

Reports are diffable regression artifacts: keys are sorted, floats go
through repr (shortest round-trip form), and nothing time- or
machine-dependent is written.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _canonical(obj.tolist())
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    return obj


def dumps_report(obj: dict) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj: dict) -> None:
    Path(path).write_text(dumps_report(obj), encoding="utf-8")


def write_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)
