"""Minimal SVG charts, no plotting dependency.

Two chart types cover every experiment here: a line chart (error rates or
posterior mass against sample size) and a heatmap (rejection rate over a
sample-size by scale grid, with optional overlay lines). Each chart embeds
its source data as JSON inside a ``<metadata id="chart-data">`` element so a
figure can be checked against the CSV it came from without parsing pixels.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as etree
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .errors import InputError

_PALETTE = ("#1f6fb4", "#d1495b", "#3a8f5d", "#8a5ab8", "#b8860b", "#4c4c4c")
_FONT = "font-family='Helvetica, Arial, sans-serif'"


def _esc(text: str) -> str:
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _fmt(x: float) -> str:
    if x == 0:
        return "0"
    if abs(x) >= 10000 or abs(x) < 0.001:
        return f"{x:.0e}".replace("e+0", "e").replace("e-0", "e-")
    if float(x) == int(x):
        return str(int(x))
    return f"{x:g}"


def _metadata(payload: dict) -> str:
    return f"<metadata id='chart-data'>{_esc(json.dumps(payload, sort_keys=True))}</metadata>"


def _linear_ticks(lo: float, hi: float, count: int = 5) -> List[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 2.5 * mag, 5 * mag, 10 * mag) if s >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks or [lo, hi]


def _log_ticks(lo: float, hi: float) -> List[float]:
    ticks = [
        10.0 ** k
        for k in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)
    ]
    return [t for t in ticks if lo / 1.0001 <= t <= hi * 1.0001] or [lo, hi]


@dataclass(frozen=True)
class LineSeries:
    label: str
    x: Tuple[float, ...]
    y: Tuple[float, ...]

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise InputError("series x and y lengths differ")
        if not self.x:
            raise InputError("series is empty")


def line_chart(
    series: Sequence[LineSeries],
    title: str,
    xlabel: str,
    ylabel: str,
    log_x: bool = False,
    y_limits: Optional[Tuple[float, float]] = None,
    width: int = 640,
    height: int = 420,
) -> str:
    if not series:
        raise InputError("no series to plot")
    left, right, top, bottom = 62, 18, 34, 50
    pw, ph = width - left - right, height - top - bottom

    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y]
    if log_x and min(xs) <= 0:
        raise InputError("log x axis needs positive x values")
    x_lo, x_hi = min(xs), max(xs)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_limits is None:
        y_lo, y_hi = min(ys), max(ys)
        pad = 0.06 * (y_hi - y_lo or 1.0)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        y_lo, y_hi = y_limits

    def px(x: float) -> float:
        if log_x:
            f = (math.log10(x) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        else:
            f = (x - x_lo) / (x_hi - x_lo)
        return left + f * pw

    def py(y: float) -> float:
        f = (y - y_lo) / (y_hi - y_lo)
        return top + (1.0 - f) * ph

    parts = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' height='{height}' "
        f"viewBox='0 0 {width} {height}'>",
        _metadata(
            {
                "chart": "line",
                "title": title,
                "series": [{"label": s.label, "x": list(s.x), "y": list(s.y)} for s in series],
            }
        ),
        f"<rect width='{width}' height='{height}' fill='white'/>",
        f"<text x='{width / 2}' y='20' text-anchor='middle' {_FONT} "
        f"font-size='14' font-weight='bold'>{_esc(title)}</text>",
    ]

    x_ticks = _log_ticks(x_lo, x_hi) if log_x else _linear_ticks(x_lo, x_hi)
    y_ticks = _linear_ticks(y_lo, y_hi)
    for t in x_ticks:
        x = px(t)
        parts.append(
            f"<line x1='{x:.1f}' y1='{top}' x2='{x:.1f}' y2='{top + ph}' "
            f"stroke='#dddddd' stroke-width='1'/>"
        )
        parts.append(
            f"<text x='{x:.1f}' y='{top + ph + 16}' text-anchor='middle' {_FONT} "
            f"font-size='11'>{_fmt(t)}</text>"
        )
    for t in y_ticks:
        y = py(t)
        parts.append(
            f"<line x1='{left}' y1='{y:.1f}' x2='{left + pw}' y2='{y:.1f}' "
            f"stroke='#dddddd' stroke-width='1'/>"
        )
        parts.append(
            f"<text x='{left - 6}' y='{y + 4:.1f}' text-anchor='end' {_FONT} "
            f"font-size='11'>{_fmt(t)}</text>"
        )
    parts.append(
        f"<rect x='{left}' y='{top}' width='{pw}' height='{ph}' fill='none' "
        f"stroke='#333333' stroke-width='1'/>"
    )
    parts.append(
        f"<text x='{left + pw / 2}' y='{height - 12}' text-anchor='middle' {_FONT} "
        f"font-size='12'>{_esc(xlabel)}</text>"
    )
    parts.append(
        f"<text x='16' y='{top + ph / 2}' text-anchor='middle' {_FONT} font-size='12' "
        f"transform='rotate(-90 16 {top + ph / 2})'>{_esc(ylabel)}</text>"
    )

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(s.x, s.y))
        parts.append(
            f"<polyline points='{pts}' fill='none' stroke='{color}' stroke-width='1.8'/>"
        )
        for x, y in zip(s.x, s.y):
            parts.append(f"<circle cx='{px(x):.1f}' cy='{py(y):.1f}' r='3' fill='{color}'/>")
        ly = top + 14 + 16 * i
        lx = left + pw - 150
        parts.append(
            f"<line x1='{lx}' y1='{ly - 4}' x2='{lx + 22}' y2='{ly - 4}' "
            f"stroke='{color}' stroke-width='1.8'/>"
        )
        parts.append(
            f"<text x='{lx + 28}' y='{ly}' {_FONT} font-size='11'>{_esc(s.label)}</text>"
        )

    parts.append("</svg>")
    return "\n".join(parts)


def _blend(frac: float) -> str:
    # light -> mid -> dark blue, linear in each half
    stops = ((247, 251, 255), (107, 174, 214), (8, 48, 107))
    frac = min(max(frac, 0.0), 1.0)
    if frac < 0.5:
        a, b, t = stops[0], stops[1], frac * 2
    else:
        a, b, t = stops[1], stops[2], frac * 2 - 1
    rgb = tuple(round(ai + (bi - ai) * t) for ai, bi in zip(a, b))
    return "#%02x%02x%02x" % rgb


def heatmap(
    values: Sequence[Sequence[float]],
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    title: str,
    xlabel: str,
    ylabel: str,
    overlays: Sequence[Tuple[str, Sequence[Tuple[float, float]]]] = (),
    v_limits: Tuple[float, float] = (0.0, 1.0),
    cell: int = 56,
) -> str:
    """Grid of colored cells with the value printed in each.

    ``values[i][j]`` is row i (bottom to top: last row drawn at the top),
    column j. Overlay polylines use fractional grid coordinates: (0, 0) is
    the outer corner of the first cell, (ncols, nrows) the opposite corner.
    """
    nrows, ncols = len(values), len(values[0])
    if len(row_labels) != nrows or len(col_labels) != ncols:
        raise InputError("label counts do not match the value grid")
    if any(len(row) != ncols for row in values):
        raise InputError("value rows have unequal lengths")
    left, top, bottom, right = 70, 40, 56, 96
    pw, ph = ncols * cell, nrows * cell
    width, height = left + pw + right, top + ph + bottom
    v_lo, v_hi = v_limits
    span = (v_hi - v_lo) or 1.0

    parts = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' height='{height}' "
        f"viewBox='0 0 {width} {height}'>",
        _metadata(
            {
                "chart": "heatmap",
                "title": title,
                "rows": list(row_labels),
                "cols": list(col_labels),
                "values": [list(map(float, row)) for row in values],
                "overlays": [
                    {"label": label, "points": [[float(a), float(b)] for a, b in pts]}
                    for label, pts in overlays
                ],
            }
        ),
        f"<rect width='{width}' height='{height}' fill='white'/>",
        f"<text x='{left + pw / 2}' y='24' text-anchor='middle' {_FONT} "
        f"font-size='14' font-weight='bold'>{_esc(title)}</text>",
    ]

    for i in range(nrows):
        y = top + ph - (i + 1) * cell
        for j in range(ncols):
            x = left + j * cell
            v = float(values[i][j])
            frac = (v - v_lo) / span
            fill = _blend(frac)
            text_color = "#ffffff" if frac > 0.55 else "#1a1a1a"
            parts.append(
                f"<rect x='{x}' y='{y}' width='{cell}' height='{cell}' fill='{fill}' "
                f"stroke='#ffffff' stroke-width='1'/>"
            )
            parts.append(
                f"<text x='{x + cell / 2}' y='{y + cell / 2 + 4}' text-anchor='middle' "
                f"{_FONT} font-size='11' fill='{text_color}'>{v:.2f}</text>"
            )
        parts.append(
            f"<text x='{left - 8}' y='{y + cell / 2 + 4}' text-anchor='end' {_FONT} "
            f"font-size='11'>{_esc(row_labels[i])}</text>"
        )
    for j in range(ncols):
        parts.append(
            f"<text x='{left + j * cell + cell / 2}' y='{top + ph + 18}' "
            f"text-anchor='middle' {_FONT} font-size='11'>{_esc(col_labels[j])}</text>"
        )

    for k, (label, pts) in enumerate(overlays):
        color = _PALETTE[(k + 1) % len(_PALETTE)]
        clipped = [
            (left + fx * cell, top + ph - fy * cell)
            for fx, fy in pts
            if 0.0 <= fx <= ncols and 0.0 <= fy <= nrows
        ]
        if len(clipped) < 2:
            continue
        path = " ".join(f"{x:.1f},{y:.1f}" for x, y in clipped)
        parts.append(
            f"<polyline points='{path}' fill='none' stroke='{color}' "
            f"stroke-width='2' stroke-dasharray='6 3'/>"
        )
        lx, ly = clipped[-1]
        parts.append(
            f"<text x='{min(lx + 4, left + pw + 2):.1f}' y='{ly:.1f}' {_FONT} "
            f"font-size='11' fill='{color}'>{_esc(label)}</text>"
        )

    # colorbar
    bar_x, bar_w = left + pw + 28, 14
    steps = 24
    for k in range(steps):
        frac = 1.0 - k / (steps - 1)
        y = top + k * (ph / steps)
        parts.append(
            f"<rect x='{bar_x}' y='{y:.1f}' width='{bar_w}' height='{ph / steps + 0.5:.1f}' "
            f"fill='{_blend(frac)}'/>"
        )
    for frac, v in ((0.0, v_lo), (0.5, (v_lo + v_hi) / 2), (1.0, v_hi)):
        y = top + ph * (1.0 - frac)
        parts.append(
            f"<text x='{bar_x + bar_w + 4}' y='{y + 4:.1f}' {_FONT} "
            f"font-size='10'>{_fmt(v)}</text>"
        )

    parts.append(
        f"<text x='{left + pw / 2}' y='{height - 14}' text-anchor='middle' {_FONT} "
        f"font-size='12'>{_esc(xlabel)}</text>"
    )
    parts.append(
        f"<text x='18' y='{top + ph / 2}' text-anchor='middle' {_FONT} font-size='12' "
        f"transform='rotate(-90 18 {top + ph / 2})'>{_esc(ylabel)}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)


def chart_data(svg_text: str) -> dict:
    """Parse the JSON payload back out of a chart produced by this module."""
    root = etree.fromstring(svg_text)
    for node in root.iter():
        if node.tag.endswith("metadata") and node.get("id") == "chart-data":
            return json.loads(node.text or "")
    raise InputError("no chart-data metadata element found")


def write_svg(path: Union[str, Path], svg_text: str) -> None:
    etree.fromstring(svg_text)  # refuse to write malformed XML
    Path(path).write_text(svg_text)
