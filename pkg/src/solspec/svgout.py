"""Hand-rolled SVG emission for the two figure kinds the tools produce:
point scatters with optional circle overlays, and integer bar charts.

No plotting dependency; output is deterministic text (element order follows
input order, coordinates go through the shared 12-digit formatter) so the
files can be compared byte for byte across runs.
"""

import math

from .errors import ValidationError
from .util import fmt

_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _svg_open(size):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
            f'height="{size}" viewBox="0 0 {size} {size}">\n')


def scatter_svg(points, circles=(), size=640, margin=40.0, dot=2.0,
                title=""):
    """Scatter of (x, y) pairs with optional (cx, cy, r) circle overlays.

    The view window is the smallest origin-centred square containing every
    point and circle, so figures of the same data scale identically.
    """
    points = [(float(x), float(y)) for x, y in points]
    circles = [(float(cx), float(cy), float(r)) for cx, cy, r in circles]
    if not points and not circles:
        raise ValidationError("nothing to draw")
    span = 0.0
    for x, y in points:
        span = max(span, abs(x), abs(y))
    for cx, cy, r in circles:
        span = max(span, abs(cx) + r, abs(cy) + r)
    if span == 0.0:
        span = 1.0
    span *= 1.05
    scale = (size - 2.0 * margin) / (2.0 * span)

    def sx(x):
        return fmt(margin + (x + span) * scale)

    def sy(y):
        return fmt(size - margin - (y + span) * scale)

    parts = [_HEADER, _svg_open(size),
             f'<rect x="0" y="0" width="{size}" height="{size}" '
             'fill="white"/>\n']
    if title:
        parts.append(f'<text x="{margin}" y="{margin / 2}" '
                     f'font-size="14" font-family="monospace">{title}'
                     '</text>\n')
    for cx, cy, r in circles:
        parts.append(f'<circle cx="{sx(cx)}" cy="{sy(cy)}" '
                     f'r="{fmt(r * scale)}" fill="none" stroke="#c03030" '
                     'stroke-width="1.5"/>\n')
    for x, y in points:
        parts.append(f'<circle cx="{sx(x)}" cy="{sy(y)}" r="{fmt(dot)}" '
                     'fill="#204080"/>\n')
    parts.append('</svg>\n')
    return "".join(parts)


def bars_svg(histogram, size=640, margin=40.0, title=""):
    """Bar chart of an integer-keyed histogram {x: count}."""
    if not histogram:
        raise ValidationError("nothing to draw")
    items = sorted((int(k), int(v)) for k, v in histogram.items())
    xmin = items[0][0]
    xmax = items[-1][0]
    peak = max(v for _, v in items)
    if peak < 1:
        raise ValidationError("histogram has no mass")
    nslots = xmax - xmin + 1
    inner = size - 2.0 * margin
    slot = inner / nslots
    bar = max(1.0, slot * 0.8)
    parts = [_HEADER, _svg_open(size),
             f'<rect x="0" y="0" width="{size}" height="{size}" '
             'fill="white"/>\n']
    if title:
        parts.append(f'<text x="{margin}" y="{margin / 2}" '
                     f'font-size="14" font-family="monospace">{title}'
                     '</text>\n')
    base = size - margin
    for x, v in items:
        h = inner * v / peak
        x0 = margin + (x - xmin + 0.1) * slot
        parts.append(f'<rect x="{fmt(x0)}" y="{fmt(base - h)}" '
                     f'width="{fmt(bar)}" height="{fmt(h)}" '
                     'fill="#204080"/>\n')
        parts.append(f'<text x="{fmt(x0)}" y="{fmt(base + 14.0)}" '
                     f'font-size="10" font-family="monospace">{x}</text>\n')
    parts.append(f'<line x1="{fmt(margin)}" y1="{fmt(base)}" '
                 f'x2="{fmt(size - margin)}" y2="{fmt(base)}" '
                 'stroke="black" stroke-width="1"/>\n')
    parts.append('</svg>\n')
    return "".join(parts)


def write_svg(text, path):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def field_slice_svg(values, extent, size=640, margin=40.0, title=""):
    """Greyscale cell grid of a 2-d real array (row-major, row 0 at the
    bottom); extent = (xmin, xmax, ymin, ymax) is recorded as metadata."""
    rows = len(values)
    if rows == 0 or len(values[0]) == 0:
        raise ValidationError("nothing to draw")
    cols = len(values[0])
    flat = [float(v) for row in values for v in row]
    if any(not math.isfinite(v) for v in flat):
        raise ValidationError("field values must be finite")
    lo = min(flat)
    hi = max(flat)
    spread = hi - lo if hi > lo else 1.0
    inner = size - 2.0 * margin
    cw = inner / cols
    ch = inner / rows
    xmin, xmax, ymin, ymax = (fmt(float(e)) for e in extent)
    parts = [_HEADER, _svg_open(size),
             f'<!-- extent {xmin} {xmax} {ymin} {ymax} -->\n',
             f'<rect x="0" y="0" width="{size}" height="{size}" '
             'fill="white"/>\n']
    if title:
        parts.append(f'<text x="{margin}" y="{margin / 2}" '
                     f'font-size="14" font-family="monospace">{title}'
                     '</text>\n')
    for i, row in enumerate(values):
        y0 = size - margin - (i + 1) * ch
        for j, v in enumerate(row):
            level = int(round(255.0 * (float(v) - lo) / spread))
            parts.append(
                f'<rect x="{fmt(margin + j * cw)}" y="{fmt(y0)}" '
                f'width="{fmt(cw)}" height="{fmt(ch)}" '
                f'fill="rgb({level},{level},{level})"/>\n')
    parts.append('</svg>\n')
    return "".join(parts)
