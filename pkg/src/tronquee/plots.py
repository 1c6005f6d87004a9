"""Standalone SVG charts: no renderer, no fonts beyond the generic family."""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

_W, _H, _PAD = 640, 420, 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _finite(vals):
    return [v for v in vals if v is not None and math.isfinite(v)]


def _span(vals):
    vals = _finite(vals)
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Frame:
    def __init__(self, xs, ys):
        self.x0, self.x1 = _span(xs)
        self.y0, self.y1 = _span(ys)

    def px(self, x):
        return _PAD + (x - self.x0) / (self.x1 - self.x0) * (_W - 2 * _PAD)

    def py(self, y):
        return _H - _PAD - (y - self.y0) / (self.y1 - self.y0) * (_H - 2 * _PAD)


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str) -> list[str]:
    out = [f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" '
           'fill="none" stroke="#444"/>',
           f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="15">'
           f'{escape(title)}</text>',
           f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" font-size="13">'
           f'{escape(xlabel)}</text>',
           f'<text x="16" y="{_H / 2}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 16 {_H / 2})">{escape(ylabel)}</text>']
    for t in _ticks(fr.x0, fr.x1):
        x = fr.px(t)
        out.append(f'<text x="{x:.1f}" y="{_H - _PAD + 16}" text-anchor="middle" '
                   f'font-size="10">{t:.3g}</text>')
    for t in _ticks(fr.y0, fr.y1):
        y = fr.py(t)
        out.append(f'<text x="{_PAD - 6}" y="{y + 3:.1f}" text-anchor="end" '
                   f'font-size="10">{t:.3g}</text>')
    return out


def _wrap(body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{_W}" height="{_H}" fill="white"/>', *body,
                      "</svg>"]) + "\n"


def line_chart(series: Sequence[tuple[str, Sequence[float], Sequence[float], str]],
               title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """``series`` holds (label, xs, ys, style) with style "line", "points" or "dashed"."""
    allx = [x for _, xs, _, _ in series for x in xs]
    ally = [y for _, _, ys, _ in series for y in ys]
    fr = _Frame(allx, ally)
    body = _axes(fr, title, xlabel, ylabel)
    for i, (label, xs, ys, style) in enumerate(series):
        col = _COLORS[i % len(_COLORS)]
        pts = [(fr.px(x), fr.py(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y)]
        if style == "points":
            body += [f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="{col}"/>' for x, y in pts]
        elif pts:
            dash = ' stroke-dasharray="6 4"' if style == "dashed" else ""
            d = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
            body.append(f'<polyline points="{d}" fill="none" stroke="{col}" '
                        f'stroke-width="1.6"{dash}/>')
        body.append(f'<text x="{_W - _PAD - 4}" y="{_PAD + 16 + 14 * i}" text-anchor="end" '
                    f'font-size="11" fill="{col}">{escape(label)}</text>')
    return _wrap(body)


def pole_map(poles: Iterable[complex], paths: Iterable[Sequence[complex]] = (),
             title: str = "", marked: Optional[Iterable[complex]] = None) -> str:
    """Pole estimates as crosses over the integration paths in the x-plane."""
    poles = list(poles)
    paths = [list(p) for p in paths]
    marked = list(marked or [])
    zs = poles + marked + [z for p in paths for z in p]
    fr = _Frame([z.real for z in zs] or [0.0], [z.imag for z in zs] or [0.0])
    body = _axes(fr, title, "Re x", "Im x")
    for p in paths:
        d = " ".join(f"{fr.px(z.real):.1f},{fr.py(z.imag):.1f}" for z in p)
        body.append(f'<polyline points="{d}" fill="none" stroke="#999" stroke-width="1"/>')
    for z in poles:
        x, y = fr.px(z.real), fr.py(z.imag)
        body.append(f'<path d="M{x - 4:.1f},{y - 4:.1f} L{x + 4:.1f},{y + 4:.1f} '
                    f'M{x - 4:.1f},{y + 4:.1f} L{x + 4:.1f},{y - 4:.1f}" stroke="#d62728" '
                    'stroke-width="2"/>')
    for z in marked:
        body.append(f'<circle cx="{fr.px(z.real):.1f}" cy="{fr.py(z.imag):.1f}" r="4" '
                    'fill="none" stroke="#1f77b4" stroke-width="2"/>')
    return _wrap(body)
