"""Minimal SVG emitter for line plots and categorical phase diagrams.

Output depends only on the data (fixed number formatting, no timestamps), so
identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=30, bottom=55)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
OUTCOME_COLORS = {"blowup": "#d62728", "blowup_certified": "#ff7f0e",
                  "global_up_to": "#1f77b4", "inconclusive": "#999999"}


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Axes:
    def __init__(self, xlim, ylim, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        self.x0, self.x1 = (self._tx(v) for v in xlim)
        self.y0, self.y1 = (self._ty(v) for v in ylim)
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0

    def _tx(self, v):
        return math.log10(v) if self.logx else v

    def _ty(self, v):
        return math.log10(v) if self.logy else v

    def px(self, v):
        w = WIDTH - MARGIN["left"] - MARGIN["right"]
        return MARGIN["left"] + w * (self._tx(v) - self.x0) / (self.x1 - self.x0)

    def py(self, v):
        h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        return HEIGHT - MARGIN["bottom"] - h * (self._ty(v) - self.y0) / (self.y1 - self.y0)


def _frame(title: str, xlabel: str, ylabel: str, ax: _Axes, xlim, ylim) -> list[str]:
    L, B = MARGIN["left"], HEIGHT - MARGIN["bottom"]
    R, T = WIDTH - MARGIN["right"], MARGIN["top"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>',
           f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{(L + R) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="16" y="{(T + B) / 2}" text-anchor="middle" '
           f'transform="rotate(-90 16 {(T + B) / 2})">{escape(ylabel)}</text>']
    for v in (xlim[0], xlim[1]):
        out.append(f'<text x="{_f(ax.px(v))}" y="{B + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in (ylim[0], ylim[1]):
        out.append(f'<text x="{L - 6}" y="{_f(ax.py(v) + 4)}" text-anchor="end">{v:.3g}</text>')
    return out


def _limits(vals, log):
    vals = [v for v in vals if math.isfinite(v) and (v > 0 or not log)]
    if not vals:
        return (1.0, 10.0) if log else (0.0, 1.0)
    lo, hi = min(vals), max(vals)
    if lo == hi:
        return (lo / 2, hi * 2) if log else (lo - 0.5, hi + 0.5)
    return lo, hi


def line_plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], *, title: str = "",
              xlabel: str = "", ylabel: str = "", logy: bool = False) -> str:
    """Return an SVG document with one polyline per ``(label, x, y)`` series."""
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    xlim, ylim = _limits(xs, False), _limits(ys, logy)
    ax = _Axes(xlim, ylim, logy=logy)
    out = _frame(title, xlabel, ylabel, ax, xlim, ylim)
    for i, (label, sx, sy) in enumerate(series):
        pts = " ".join(f"{_f(ax.px(x))},{_f(ax.py(y))}" for x, y in zip(sx, sy)
                       if math.isfinite(x) and math.isfinite(y) and (y > 0 or not logy))
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - MARGIN["right"] - 6}" y="{MARGIN["top"] + 16 + 14 * i}" '
                   f'text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def phase_plot(cells: Sequence[tuple[float, float, str]], *, vlines: Sequence[tuple[str, float]] = (),
               title: str = "", xlabel: str = "p", ylabel: str = "amplitude") -> str:
    """Scatter of ``(p, amplitude, outcome)`` cells, amplitude on a log axis, with labelled vertical lines."""
    ps = [c[0] for c in cells] + [v for _, v in vlines]
    amps = [c[1] for c in cells]
    xlim = _limits(ps, False)
    pad = 0.05 * (xlim[1] - xlim[0] or 1.0)
    xlim = (xlim[0] - pad, xlim[1] + pad)
    ylim = _limits(amps, True)
    ylim = (ylim[0] / 2, ylim[1] * 2)
    ax = _Axes(xlim, ylim, logy=True)
    out = _frame(title, xlabel, ylabel, ax, xlim, ylim)
    for i, (label, v) in enumerate(vlines):
        x = _f(ax.px(v))
        out.append(f'<line x1="{x}" y1="{MARGIN["top"]}" x2="{x}" y2="{HEIGHT - MARGIN["bottom"]}" '
                   f'stroke="black" stroke-dasharray="{4 + 2 * i},3"/>')
        out.append(f'<text x="{x}" y="{MARGIN["top"] + 12 + 12 * i}" dx="4">{escape(label)}</text>')
    for p, a, kind in cells:
        color = OUTCOME_COLORS.get(kind, "#000000")
        out.append(f'<circle cx="{_f(ax.px(p))}" cy="{_f(ax.py(a))}" r="6" fill="{color}"/>')
    for i, (kind, color) in enumerate(OUTCOME_COLORS.items()):
        y = HEIGHT - MARGIN["bottom"] - 10 - 14 * i
        out.append(f'<text x="{WIDTH - MARGIN["right"] - 6}" y="{y}" text-anchor="end" fill="{color}">{kind}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
