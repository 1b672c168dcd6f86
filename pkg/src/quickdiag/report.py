"""CSV and JSON writers for the command-line reports.

Numbers are written with six significant digits and a "." decimal separator
so that outputs can be diffed as golden files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

FIGURE_COLUMNS = ["phi", "algorithm", "delay_mean", "delay_se", "misisolation_frac"]
DELAY_COLUMNS = ["algorithm", "mean", "change_type", "h", "delay_mean", "delay_se", "misisolation_frac", "censored", "runs"]
FALSE_COLUMNS = ["algorithm", "i", "j", "h", "false_mean", "false_se", "censored", "runs", "lower_bound"]


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, (tuple, list)):
        return ";".join(fmt(float(v)) for v in x)
    return str(x)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(columns, rows))
    return path


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2) + "\n")
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
