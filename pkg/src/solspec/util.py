"""Shared formatting and file-emission helpers.

Every emitter in the package funnels through these so that identical
inputs always produce byte-identical files: 12 significant digits for
floats, comma separation, LF line endings.
"""

from __future__ import annotations

import math


def fmt(x) -> str:
    """Canonical text form: %.12g for floats, plain repr for ints."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    return "%.12g" % xf


def write_csv(path, header, rows):
    """Write rows of mixed int/float/str cells with a header line."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else fmt(cell)
                              for cell in row) + "\n")


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell)
                              for cell in row))
    return "\n".join(lines) + "\n"
