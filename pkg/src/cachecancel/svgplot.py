"""Standalone SVG charts for sweep and scheme tables.

Deliberately small: fixed 640x420 viewport, no timestamps, no randomness,
so the same input renders byte-identical output. Series are drawn in
order; a series with two or more points gets a polyline, single points
get a marker only, and points carrying an error value get vertical error
bars. Non-finite coordinates are dropped (the complete-cancellation rows
of a sweep have an infinite abscissa and cannot sit on a linear axis).
"""

import math

__all__ = ["Series", "render_chart"]

_WIDTH = 640.0
_HEIGHT = 420.0
_MARGIN_L = 72.0
_MARGIN_R = 24.0
_MARGIN_T = 34.0
_MARGIN_B = 54.0

_PALETTE = ("#1f6fb4", "#c44e52", "#2f8e5b", "#8172b2", "#937860",
            "#64b5cd")


class Series:
    """One named curve: points are (x, y) or (x, y, yerr) tuples."""

    def __init__(self, label, points, marker=True, line=True):
        self.label = str(label)
        cleaned = []
        for p in points:
            x, y = float(p[0]), float(p[1])
            err = float(p[2]) if len(p) > 2 and p[2] is not None else None
            if math.isfinite(x) and math.isfinite(y):
                cleaned.append((x, y, err))
        self.points = cleaned
        self.marker = marker
        self.line = line


def _fmt(v):
    return f"{v:.4f}"


def _ticks(lo, hi, count=5):
    if not math.isfinite(lo) or not math.isfinite(hi):
        lo, hi = 0.0, 1.0
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.5
        lo, hi = lo - pad, hi + pad
    span = hi - lo
    step = span / (count - 1)
    return [lo + i * step for i in range(count)], lo, hi


def _bounds(series_list, index):
    values = [p[index] for s in series_list for p in s.points]
    if not values:
        return 0.0, 1.0
    lo, hi = min(values), max(values)
    if index == 1:
        for s in series_list:
            for x, y, err in s.points:
                if err is not None:
                    lo = min(lo, y - err)
                    hi = max(hi, y + err)
    pad = (hi - lo) * 0.06
    if pad == 0.0:
        pad = 1.0 if hi == 0.0 else abs(hi) * 0.1
    return lo - pad, hi + pad


def render_chart(series_list, x_label="", y_label="", title=""):
    """Render series to a complete SVG document (a string)."""
    series_list = list(series_list)
    x_lo, x_hi = _bounds(series_list, 0)
    y_lo, y_hi = _bounds(series_list, 1)
    x_ticks, x_lo, x_hi = _ticks(x_lo, x_hi)
    y_ticks, y_lo, y_hi = _ticks(y_lo, y_hi)

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x):
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" '
               f'viewBox="0 0 {_WIDTH:.0f} {_HEIGHT:.0f}" '
               f'width="{_WIDTH:.0f}" height="{_HEIGHT:.0f}">')
    out.append(f'<rect x="0" y="0" width="{_WIDTH:.0f}" '
               f'height="{_HEIGHT:.0f}" fill="#ffffff"/>')
    out.append(f'<rect x="{_fmt(_MARGIN_L)}" y="{_fmt(_MARGIN_T)}" '
               f'width="{_fmt(plot_w)}" height="{_fmt(plot_h)}" '
               f'fill="none" stroke="#444444" stroke-width="1"/>')

    for t in x_ticks:
        px = sx(t)
        out.append(f'<line x1="{_fmt(px)}" y1="{_fmt(_MARGIN_T + plot_h)}" '
                   f'x2="{_fmt(px)}" y2="{_fmt(_MARGIN_T + plot_h + 5)}" '
                   f'stroke="#444444" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(px)}" y="{_fmt(_MARGIN_T + plot_h + 20)}" '
                   f'font-family="sans-serif" font-size="11" '
                   f'text-anchor="middle">{t:.6g}</text>')
    for t in y_ticks:
        py = sy(t)
        out.append(f'<line x1="{_fmt(_MARGIN_L - 5)}" y1="{_fmt(py)}" '
                   f'x2="{_fmt(_MARGIN_L)}" y2="{_fmt(py)}" '
                   f'stroke="#444444" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(_MARGIN_L - 9)}" y="{_fmt(py + 4)}" '
                   f'font-family="sans-serif" font-size="11" '
                   f'text-anchor="end">{t:.6g}</text>')

    if title:
        out.append(f'<text x="{_fmt(_WIDTH / 2)}" y="20" '
                   f'font-family="sans-serif" font-size="14" '
                   f'text-anchor="middle">{_escape(title)}</text>')
    if x_label:
        out.append(f'<text x="{_fmt(_MARGIN_L + plot_w / 2)}" '
                   f'y="{_fmt(_HEIGHT - 16)}" font-family="sans-serif" '
                   f'font-size="12" text-anchor="middle">'
                   f'{_escape(x_label)}</text>')
    if y_label:
        cx, cy = 18.0, _MARGIN_T + plot_h / 2
        out.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" '
                   f'font-family="sans-serif" font-size="12" '
                   f'text-anchor="middle" '
                   f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">'
                   f'{_escape(y_label)}</text>')

    for idx, series in enumerate(series_list):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = series.points
        for x, y, err in pts:
            if err is None or err <= 0:
                continue
            px, py0, py1 = sx(x), sy(y - err), sy(y + err)
            out.append(f'<line x1="{_fmt(px)}" y1="{_fmt(py0)}" '
                       f'x2="{_fmt(px)}" y2="{_fmt(py1)}" '
                       f'stroke="{color}" stroke-width="1"/>')
            for py in (py0, py1):
                out.append(f'<line x1="{_fmt(px - 3)}" y1="{_fmt(py)}" '
                           f'x2="{_fmt(px + 3)}" y2="{_fmt(py)}" '
                           f'stroke="{color}" stroke-width="1"/>')
        if series.line and len(pts) >= 2:
            coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}"
                              for x, y, _ in pts)
            out.append(f'<polyline points="{coords}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
        if series.marker or len(pts) < 2:
            for x, y, _ in pts:
                out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" '
                           f'r="3" fill="{color}"/>')
        lx = _MARGIN_L + plot_w - 150.0
        ly = _MARGIN_T + 16.0 + 18.0 * idx
        out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 4)}" '
                   f'x2="{_fmt(lx + 22)}" y2="{_fmt(ly - 4)}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_fmt(lx + 28)}" y="{_fmt(ly)}" '
                   f'font-family="sans-serif" font-size="11">'
                   f'{_escape(series.label)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
