"""Serialization with stable ordering and round-trip float formatting."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from typing import Iterable

import numpy as np

__all__ = [
    "fmt_float",
    "to_jsonable",
    "dumps_json",
    "csv_text",
    "distribution_rows",
    "snapshot_lines",
    "matrix_json",
]


def fmt_float(x: float) -> str:
    """Shortest string that parses back to the same double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _float(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def to_jsonable(obj):
    """Plain JSON types; complex numbers become [re, im] pairs."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def distribution_rows(t: int, dist: dict) -> list[tuple]:
    """(t, copy, x, y, probability) with the origin first, then sorted sites."""
    rows = []
    for site in sorted(dist, key=lambda s: (s.copy is not None, s.copy or 0, s.x, s.y)):
        rows.append((t, "" if site.copy is None else site.copy, site.x, site.y, float(dist[site])))
    return rows


def snapshot_lines(state, threshold: float = 0.0) -> str:
    """One JSON object per nonzero amplitude: {copy, x, y, label, re, im}."""
    out = []
    for (g, x, y, label), amp in state.items(threshold):
        rec = {"copy": g, "x": x, "y": y, "label": label, "re": amp.real, "im": amp.imag}
        out.append(json.dumps(to_jsonable(rec), sort_keys=True))
    return "\n".join(out) + ("\n" if out else "")


def matrix_json(m: np.ndarray):
    return to_jsonable(np.asarray(m, dtype=complex))
