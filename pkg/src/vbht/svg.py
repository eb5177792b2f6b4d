"""Minimal SVG charts (scatter and line) written without plotting dependencies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 40, 55


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    color: str
    marker: str = "circle"  # "circle", "triangle" or "line"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(step))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= step), default=step)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(hi):
        out.append(round(v, 12))
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render(
    series: Sequence[Series],
    title: str,
    xlabel: str,
    ylabel: str,
    log_x: bool = False,
) -> str:
    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y]
    if not xs:
        xs, ys = [1.0], [0.0]
    fx = (lambda v: math.log10(v)) if log_x else float
    x_lo, x_hi = fx(min(xs)), fx(max(xs))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    pad = 0.04 * (x_hi - x_lo)
    x_lo, x_hi = x_lo - pad, x_hi + pad
    y_lo, y_hi = min(ys), max(ys)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + (fx(v) - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return MARGIN_T + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
        f"{escape(title)}</text>",
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
    ]

    if log_x:
        xticks = sorted({v for v in xs})
        if len(xticks) > 10:
            xticks = [10**e for e in range(math.floor(x_lo), math.ceil(x_hi) + 1)
                      if x_lo <= e <= x_hi]
    else:
        xticks = _ticks(x_lo, x_hi)
    for v in xticks:
        x = px(v)
        out.append(f'<line x1="{x:.1f}" y1="{MARGIN_T + plot_h}" x2="{x:.1f}" '
                   f'y2="{MARGIN_T + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{MARGIN_T + plot_h + 18}" '
                   f'text-anchor="middle">{_fmt(v)}</text>')
    for v in _ticks(y_lo, y_hi):
        y = py(v)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{y:.1f}" x2="{MARGIN_L}" '
                   f'y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.1f}" '
                   f'text-anchor="end">{_fmt(v)}</text>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{HEIGHT - 12}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + plot_h / 2:.1f})">'
               f"{escape(ylabel)}</text>")

    for k, s in enumerate(series):
        cls = f"series-{k}"
        out.append(f'<g class="{cls}" data-label="{escape(s.label)}">')
        if s.marker == "line":
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(s.x, s.y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" '
                       'stroke-width="2"/>')
        else:
            for a, b in zip(s.x, s.y):
                cx, cy = px(a), py(b)
                if s.marker == "triangle":
                    out.append(
                        f'<polygon points="{cx:.2f},{cy - 4:.2f} {cx - 3.5:.2f},'
                        f'{cy + 3:.2f} {cx + 3.5:.2f},{cy + 3:.2f}" fill="none" '
                        f'stroke="{s.color}"/>'
                    )
                else:
                    out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" '
                               f'fill="none" stroke="{s.color}"/>')
        out.append("</g>")
        ly = MARGIN_T + 14 + 20 * k
        lx = WIDTH - MARGIN_R + 12
        out.append(f'<rect x="{lx}" y="{ly - 8}" width="10" height="10" '
                   f'fill="{s.color}"/>')
        out.append(f'<text x="{lx + 16}" y="{ly + 1}">{escape(s.label)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
