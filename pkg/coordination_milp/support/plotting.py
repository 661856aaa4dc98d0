from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from tempita import Template

WIDTH = 640
HEIGHT = 400
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

SVG_TEMPLATE = """<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">
<rect x="0" y="0" width="${width}" height="${height}" fill="white"/>
<text x="${width / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">${title}</text>
<line x1="${left}" y1="${bottom}" x2="${right}" y2="${bottom}" stroke="black"/>
<line x1="${left}" y1="${bottom}" x2="${left}" y2="${top}" stroke="black"/>
${for tick in x_ticks}
<line x1="${tick.position}" y1="${bottom}" x2="${tick.position}" y2="${bottom + 5}" stroke="black"/>
<text x="${tick.position}" y="${bottom + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${tick.label}</text>
${endfor}
${for tick in y_ticks}
<line x1="${left - 5}" y1="${tick.position}" x2="${left}" y2="${tick.position}" stroke="black"/>
<text x="${left - 8}" y="${tick.position + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${tick.label}</text>
${endfor}
<text x="${(left + right) / 2}" y="${height - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">${x_label}</text>
<text x="16" y="${(top + bottom) / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 ${(top + bottom) / 2})">${y_label}</text>
${for line in lines}
<polyline fill="none" stroke="${line.color}" stroke-width="2" points="${line.points}"/>
${for bar in line.bars}
<line x1="${bar[0]}" y1="${bar[1]}" x2="${bar[0]}" y2="${bar[2]}" stroke="${line.color}"/>
${endfor}
${for point in line.markers}
<circle cx="${point[0]}" cy="${point[1]}" r="3" fill="${line.color}"/>
${endfor}
<text x="${right - 4}" y="${top + 16 * (line.index + 1)}" text-anchor="end" font-family="sans-serif" font-size="11" fill="${line.color}">${line.name}</text>
${endfor}
</svg>
"""


class Series(NamedTuple):
    name: str
    x: Sequence[float]
    y: Sequence[float]
    # one standard deviation per point
    errors: Optional[Sequence[float]] = None


class _Tick(NamedTuple):
    position: float
    label: str


class _Line(NamedTuple):
    index: int
    name: str
    color: str
    points: str
    markers: List
    bars: List


def _ticks(lo, hi, count, scale) -> List[_Tick]:
    return [_Tick(round(scale(v), 2), "{:.3g}".format(v)) for v in np.linspace(lo, hi, count)]


def line_chart(title: str, x_label: str, y_label: str, series: Sequence[Series]) -> str:
    """
    Renders line series with optional error bars as a standalone SVG document
    """
    left, right = MARGIN, WIDTH - MARGIN / 2
    top, bottom = MARGIN, HEIGHT - MARGIN
    xs = np.concatenate([np.asarray(s.x, dtype=float) for s in series]) if series else np.zeros(1)
    lows, highs = [], []
    for s in series:
        y = np.asarray(s.y, dtype=float)
        err = np.asarray(s.errors, dtype=float) if s.errors is not None else np.zeros_like(y)
        lows.append(y - err)
        highs.append(y + err)
    y_lo = float(np.min(np.concatenate(lows))) if lows else 0.0
    y_hi = float(np.max(np.concatenate(highs))) if highs else 1.0
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1
    y_lo = min(y_lo, 0.0)
    if y_hi <= y_lo:
        y_hi = y_lo + 1

    sx = lambda v: left + (v - x_lo) / (x_hi - x_lo) * (right - left)
    sy = lambda v: bottom - (v - y_lo) / (y_hi - y_lo) * (bottom - top)

    lines = []
    for n, s in enumerate(series):
        points = [(round(sx(x), 2), round(sy(y), 2)) for x, y in zip(s.x, s.y)]
        bars = []
        if s.errors is not None:
            for x, y, e in zip(s.x, s.y, s.errors):
                bars.append((round(sx(x), 2), round(sy(y - e), 2), round(sy(y + e), 2)))
        lines.append(
            _Line(
                n,
                s.name,
                COLORS[n % len(COLORS)],
                " ".join("{},{}".format(px, py) for px, py in points),
                points,
                bars,
            )
        )
    t = Template(content=SVG_TEMPLATE, delimiters=("${", "}"))
    return t.substitute(
        width=WIDTH,
        height=HEIGHT,
        left=left,
        right=right,
        top=top,
        bottom=bottom,
        title=title,
        x_label=x_label,
        y_label=y_label,
        x_ticks=_ticks(x_lo, x_hi, 5, sx),
        y_ticks=_ticks(y_lo, y_hi, 5, sy),
        lines=lines,
    )
