"""Table writers.  CSV is RFC-4180 with CRLF line ends; floats use repr so
values round-trip exactly and do not depend on the locale."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, List

import numpy as np


def _plain(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _cell(value: Any) -> str:
    value = _plain(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return ""
    return str(value)


def to_csv(columns: List[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _json_value(value: Any) -> Any:
    value = _plain(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if value == "":
        return None
    return value


def to_json(columns: List[str], rows: List[dict], single: bool = False) -> str:
    recs = [{c: _json_value(r.get(c, "")) for c in columns} for r in rows]
    payload = recs[0] if single and len(recs) == 1 else recs
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
