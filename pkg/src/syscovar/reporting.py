"""CSV and JSON writers with a ``#``-prefixed metadata preamble."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

from .errors import SysCovarError


class OutputError(SysCovarError, OSError):
    pass


SHORT = "%.6g"


def format_value(x, float_format=None):
    """Text form of a cell; floats use ``float_format`` or the shortest round-trip repr."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return float_format % x if float_format else repr(x)
    return str(x)


def _json_value(x, float_format):
    if isinstance(x, float):
        # round-trip through the CSV format so both outputs carry identical digits
        return float(format_value(x, float_format)) if math.isfinite(x) else None
    return x


def metadata_lines(meta):
    return [f"# {k}: {format_value(v)}" for k, v in meta.items()]


def render_csv(rows, columns, meta=None, float_format=None):
    buf = io.StringIO()
    for line in metadata_lines(meta or {}):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row[c], float_format) for c in columns])
    return buf.getvalue()


def render_json(rows, columns, meta=None, float_format=None):
    head = "".join(line + "\n" for line in metadata_lines(meta or {}))
    body = [{c: _json_value(row[c], float_format) for c in columns} for row in rows]
    return head + json.dumps(body, indent=2) + "\n"


def _emit(text, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    try:
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {p}: {exc.strerror or exc}") from exc


def write_csv(rows, columns, path=None, meta=None, float_format=None):
    _emit(render_csv(rows, columns, meta, float_format), path)


def write_json(rows, columns, path=None, meta=None, float_format=None):
    _emit(render_json(rows, columns, meta, float_format), path)
