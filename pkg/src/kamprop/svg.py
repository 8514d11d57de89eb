"""Static SVG 1.1 line plots: axes, polylines, labels. No plotting dependency."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
DASHES = ("8,4", "2,3", "", "6,2,2,2", "4,4", "")

WIDTH = 640
PANEL_HEIGHT = 300
MARGIN = (70, 20, 30, 45)  # left, right, top, bottom


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _panel(x, series, title, xlabel, ylabel, top):
    left, right, mtop, bottom = MARGIN
    w = WIDTH - left - right
    h = PANEL_HEIGHT - mtop - bottom
    ys = [v for _, vals in series for v in vals if v is not None and math.isfinite(v)]
    xs = [v for v in x if math.isfinite(v)]
    if not ys or not xs:
        return [f'<text x="{left}" y="{top + mtop + 20}">{escape(title)}: no finite data</text>']
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5

    def px(v):
        return left + (v - x0) / (x1 - x0) * w

    def py(v):
        return top + mtop + h - (v - y0) / (y1 - y0) * h

    out = [
        f'<rect x="{left}" y="{top + mtop}" width="{w}" height="{h}" fill="none" stroke="black"/>',
        f'<text x="{left + w / 2:.1f}" y="{top + mtop - 8}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{left + w / 2:.1f}" y="{top + PANEL_HEIGHT - 8}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="16" y="{top + mtop + h / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {top + mtop + h / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for tx in _ticks(x0, x1):
        out.append(f'<text x="{px(tx):.1f}" y="{top + mtop + h + 15}" text-anchor="middle" font-size="10">{tx:.3g}</text>')
    for ty in _ticks(y0, y1):
        out.append(f'<text x="{left - 5}" y="{py(ty) + 3:.1f}" text-anchor="end" font-size="10">{ty:.3g}</text>')
    for i, (label, vals) in enumerate(series):
        color, dash = COLORS[i % len(COLORS)], DASHES[i % len(DASHES)]
        segments, cur = [], []
        for xv, yv in zip(x, vals):
            if yv is None or not math.isfinite(yv):
                if cur:
                    segments.append(cur)
                cur = []
            else:
                cur.append(f"{px(xv):.2f},{py(yv):.2f}")
        if cur:
            segments.append(cur)
        style = f' stroke-dasharray="{dash}"' if dash else ""
        for seg in segments:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{style} points="{" ".join(seg)}"/>')
        ly = top + mtop + 14 + 14 * i
        out.append(f'<line x1="{left + w - 120}" y1="{ly - 4}" x2="{left + w - 95}" y2="{ly - 4}" stroke="{color}"{style}/>')
        out.append(f'<text x="{left + w - 90}" y="{ly}" font-size="10">{escape(label)}</text>')
    return out


def line_plot(path, x, panels, xlabel):
    """Write stacked panels; ``panels`` is a list of ``(title, ylabel, [(label, values), ...])``."""
    height = PANEL_HEIGHT * len(panels)
    body = []
    for i, (title, ylabel, series) in enumerate(panels):
        body += _panel(list(x), series, title, xlabel, ylabel, i * PANEL_HEIGHT)
    doc = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" '
        f'font-family="sans-serif">',
        '<rect width="100%" height="100%" fill="white"/>',
        *body,
        "</svg>",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(doc) + "\n")
