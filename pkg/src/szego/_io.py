"""JSON/CSV helpers shared by the data types and the CLI."""

import csv
import io
import math
import os
import tempfile

import numpy as np


def format_float(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite number {x!r} cannot be written as JSON")
    if x == 0.0:
        return "0.0"
    text = format(x, ".17g")
    # keep floats recognisable as floats
    return text if any(ch in text for ch in ".en") else text + ".0"


def complex_pairs(values):
    arr = np.asarray(values, dtype=complex).ravel()
    return [[float(v.real), float(v.imag)] for v in arr]


def pairs_to_complex(pairs):
    if len(pairs) == 0:
        return np.zeros(0, dtype=complex)
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def dumps(obj, indent=1, _level=0):
    """JSON text with every float written at 17 significant digits.

    Output depends only on ``obj``: dict keys keep insertion order and no
    platform-dependent repr is used, so identical inputs give identical bytes.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{_quote(k)}: {dumps(v, indent, _level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return _quote(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _quote(s):
    import json
    return json.dumps(str(s), ensure_ascii=False)


def atomic_write(path, text):
    """Write ``text`` (UTF-8) to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()
