"""Deterministic JSON and CSV emission.

Outputs must be byte-identical across runs for identical inputs: field
order is insertion order, floats are rendered with 17 significant digits,
and no locale- or environment-dependent formatting is used.
"""

from __future__ import annotations

import io


def _fmt_float(x: float) -> str:
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def _render(obj, out):
    if obj is None:
        out.write("null")
    elif obj is True:
        out.write("true")
    elif obj is False:
        out.write("false")
    elif isinstance(obj, int):
        out.write(str(obj))
    elif isinstance(obj, float):
        out.write(_fmt_float(obj))
    elif isinstance(obj, str):
        out.write('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        out.write("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.write(", ")
            out.write('"' + str(k) + '": ')
            _render(v, out)
        out.write("}")
    elif isinstance(obj, (list, tuple)):
        out.write("[")
        for i, v in enumerate(obj):
            if i:
                out.write(", ")
            _render(v, out)
        out.write("]")
    else:
        raise TypeError(f"not JSON-serializable: {type(obj)}")


def dumps(obj) -> str:
    out = io.StringIO()
    _render(obj, out)
    out.write("\n")
    return out.getvalue()


def csv_lines(header, rows) -> str:
    """Rows of ints/floats/strings as deterministic CSV text."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for c in row:
            if isinstance(c, bool):
                cells.append("true" if c else "false")
            elif isinstance(c, int):
                cells.append(str(c))
            elif isinstance(c, float):
                cells.append(_fmt_float(c))
            else:
                cells.append(str(c))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
