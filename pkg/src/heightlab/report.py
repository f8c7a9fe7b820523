"""Deterministic JSON and CSV emission.

Floats are written with 17 significant digits so they round-trip bit for
bit; non-finite floats become null. Fractions are written as "p/q" strings.
Dict key order is preserved as built.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any, Iterable, Sequence


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = "%.17g" % x
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def to_json(obj: Any, indent: int = 2) -> str:
    return _encode(obj, 0, indent) + "\n"


def _encode(obj: Any, level: int, indent: int) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, level + 1, indent)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, bool, Fraction)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, level + 1, indent) for v in obj) + "]"
        items = [inner + _encode(v, level + 1, indent) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return "" if not math.isfinite(v) else "%.17g" % v
    if v is None:
        return ""
    return str(v)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()
