"""Canonical JSON output: stable key order, LF endings, full-precision floats.

Floats are printed with 17 significant digits, which round-trips any
IEEE double bit-exactly through json.loads.  Key order is insertion
order of the dict being written, so writers control the layout.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["dumps", "write_path", "read_path"]


def _fmt(value, indent: int, pieces: list):
    if isinstance(value, dict):
        if not value:
            pieces.append("{}")
            return
        pieces.append("{\n")
        pad = "  " * (indent + 1)
        for i, (key, item) in enumerate(value.items()):
            pieces.append(f"{pad}{json.dumps(str(key))}: ")
            _fmt(item, indent + 1, pieces)
            pieces.append(",\n" if i + 1 < len(value) else "\n")
        pieces.append("  " * indent + "}")
    elif isinstance(value, (list, tuple, np.ndarray)):
        items = list(value)
        if not items:
            pieces.append("[]")
            return
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in items)
        if flat:
            pieces.append("[")
            for i, item in enumerate(items):
                _fmt(item, indent, pieces)
                if i + 1 < len(items):
                    pieces.append(", ")
            pieces.append("]")
        else:
            pieces.append("[\n")
            pad = "  " * (indent + 1)
            for i, item in enumerate(items):
                pieces.append(pad)
                _fmt(item, indent + 1, pieces)
                pieces.append(",\n" if i + 1 < len(items) else "\n")
            pieces.append("  " * indent + "]")
    elif isinstance(value, bool) or value is None:
        pieces.append(json.dumps(value))
    elif isinstance(value, (int, np.integer)):
        pieces.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"non-finite float {v!r} has no JSON form")
        pieces.append(format(v, ".17g"))
    elif isinstance(value, str):
        pieces.append(json.dumps(value))
    else:
        raise TypeError(f"cannot serialize {type(value)!r}")


def dumps(obj) -> str:
    pieces: list = []
    _fmt(obj, 0, pieces)
    pieces.append("\n")
    return "".join(pieces)


def write_path(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def read_path(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
