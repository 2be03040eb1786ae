"""Static SVG phase portraits.

The drawing is assembled by hand from a fixed element order so identical
inputs give identical bytes: window frame, discontinuity-line arcs styled
by class, singularity glyphs, and a grid of short trajectory streaks per
half-plane.  Elements carry CSS classes (arc-sewing, arc-sliding,
arc-escaping, glyph-saddle, glyph-node, glyph-fold, glyph-nonelementary,
streak) so consumers can assert on structure rather than pixels.
"""

from __future__ import annotations

import math

import numpy as np

from . import dline, flow
from .dline import PointTag, SingKind
from .errors import FilippovError, IdenticallyZeroOnD
from .polys import PiecewiseField
from .tolerances import Tolerances, default_tols

WIDTH, HEIGHT = 720, 540
MARGIN = 40

ARC_CLASS = {
    PointTag.SEWING: "arc-sewing",
    PointTag.SLIDING: "arc-sliding",
    PointTag.ESCAPING: "arc-escaping",
}
ARC_COLOR = {
    "arc-sewing": "#888888",
    "arc-sliding": "#d62728",
    "arc-escaping": "#1f77b4",
}
GLYPH_CLASS = {
    SingKind.FZ_SADDLE: "glyph-saddle",
    SingKind.FZ_NODE: "glyph-node",
    SingKind.FOLD_X: "glyph-fold",
    SingKind.FOLD_Y: "glyph-fold",
    SingKind.NON_ELEMENTARY: "glyph-nonelementary",
}


def _fmt(v: float) -> str:
    return "%.6g" % v


class _Canvas:
    def __init__(self, window):
        self.x0, self.x1, self.y0, self.y1 = window
        self.parts: list[str] = []

    def map(self, x: float, y: float) -> tuple[float, float]:
        sx = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)
        sy = HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * \
            (HEIGHT - 2 * MARGIN)
        return sx, sy

    def line(self, a, b, cls, color, width=1.5):
        (x1, y1), (x2, y2) = self.map(*a), self.map(*b)
        self.parts.append(
            f'<line class="{cls}" x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
            f'x2="{_fmt(x2)}" y2="{_fmt(y2)}" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"/>')

    def polyline(self, pts, cls, color, width=1.0):
        if len(pts) < 2:
            return
        coords = " ".join(f"{_fmt(sx)},{_fmt(sy)}"
                          for sx, sy in (self.map(x, y) for x, y in pts))
        self.parts.append(
            f'<polyline class="{cls}" points="{coords}" fill="none" '
            f'stroke="{color}" stroke-width="{_fmt(width)}"/>')

    def glyph(self, x, y, cls):
        sx, sy = self.map(x, y)
        if cls == "glyph-saddle":
            self.parts.append(
                f'<g class="{cls}"><line x1="{_fmt(sx - 5)}" '
                f'y1="{_fmt(sy - 5)}" x2="{_fmt(sx + 5)}" y2="{_fmt(sy + 5)}" '
                f'stroke="#000" stroke-width="1.5"/>'
                f'<line x1="{_fmt(sx - 5)}" y1="{_fmt(sy + 5)}" '
                f'x2="{_fmt(sx + 5)}" y2="{_fmt(sy - 5)}" stroke="#000" '
                f'stroke-width="1.5"/></g>')
        elif cls == "glyph-node":
            self.parts.append(
                f'<circle class="{cls}" cx="{_fmt(sx)}" cy="{_fmt(sy)}" '
                f'r="4" fill="#000"/>')
        elif cls == "glyph-fold":
            self.parts.append(
                f'<circle class="{cls}" cx="{_fmt(sx)}" cy="{_fmt(sy)}" '
                f'r="4" fill="none" stroke="#000" stroke-width="1.5"/>')
        else:
            self.parts.append(
                f'<rect class="{cls}" x="{_fmt(sx - 4)}" y="{_fmt(sy - 4)}" '
                f'width="8" height="8" fill="#9467bd"/>')


def render_portrait(Z: PiecewiseField,
                    window: tuple[float, float, float, float],
                    streak_grid: int = 7, streak_time: float = 0.6,
                    tols: Tolerances | None = None) -> str:
    """SVG 1.1 portrait of Z on the window; degrades to an empty frame on
    degenerate input instead of failing."""
    tols = tols or default_tols()
    x0, x1, y0, y1 = window
    c = _Canvas(window)
    c.parts.append(
        f'<rect class="frame" x="{MARGIN}" y="{MARGIN}" '
        f'width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" '
        f'fill="none" stroke="#000" stroke-width="1"/>')
    if x1 > x0 and y1 > y0:
        _draw_streaks(c, Z, window, streak_grid, streak_time, tols)
        _draw_d_line(c, Z, window, tols)
    body = "\n".join(c.parts)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f"{body}\n</svg>\n")


def _draw_d_line(c: _Canvas, Z, window, tols):
    span = (window[0], window[1])
    if not (window[2] <= 0.0 <= window[3]):
        return
    try:
        arcs = dline.segment_d(Z, span, tols)
    except IdenticallyZeroOnD:
        c.line((window[0], 0.0), (window[1], 0.0), "arc-degenerate",
               "#cccccc", 2.0)
        return
    for arc in arcs:
        cls = ARC_CLASS.get(arc.tag)
        if cls is None:
            continue
        c.line((arc.interval[0], 0.0), (arc.interval[1], 0.0), cls,
               ARC_COLOR[cls], 2.5)
    try:
        sings = dline.fz_singularities(Z, span, tols)
        folds = dline.fold_points(Z, span, tols)
    except FilippovError:
        return
    for s in list(sings) + list(folds):
        c.glyph(s.x, 0.0, GLYPH_CLASS[s.kind])


def _draw_streaks(c: _Canvas, Z, window, grid, streak_time, tols):
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, grid + 2)[1:-1]
    ys = np.linspace(y0, y1, grid + 2)[1:-1]
    for y in ys:
        if abs(y) < 1e-12:
            continue
        fld = Z.X if y > 0 else Z.Y
        ddir = -1 if y > 0 else 1
        color = "#2ca02c" if y > 0 else "#ff7f0e"
        for x in xs:
            try:
                tr = flow.integrate_smooth(fld, (float(x), float(y)),
                                           streak_time, window, ddir,
                                           tols=tols)
            except FilippovError:
                continue
            pts = [(float(px), float(py)) for px, py in tr.states[:, :2]]
            c.polyline(pts, "streak", color, 0.8)
