"""Minimal static SVG 1.1 line plots (axes, ticks, polylines, legend)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f5fbf", "#c0392b", "#27864a", "#8e44ad", "#d68910", "#17202a", "#7f8c8d", "#16a085", "#a04000")


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(step))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= step), default=step)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(step):
        out.append(round(v, 12))
        v += step
    return out


def line_plot(series, title="", xlabel="", ylabel="", metadata="", dashed=()) -> str:
    """Render ``{label: (xs, ys)}`` as an SVG document string.

    Non-finite points are skipped. ``dashed`` names series drawn dashed.
    """
    W, H, L, R, T, B = 640, 420, 70, 190, 40, 55
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    xs = [p[0] for p in pts] or [0.0, 1.0]
    ys = [p[1] for p in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(min(ys), 0.0), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = W - L - R, H - T - B

    def sx(x):
        return L + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return T + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f"<title>{escape(title)}</title>",
        f"<desc>{escape(metadata)}</desc>",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{T + ph}" x2="{X:.2f}" y2="{T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{T + ph + 18}" font-size="11" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{L - 5}" y1="{Y:.2f}" x2="{L}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{L - 8}" y="{Y + 4:.2f}" font-size="11" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{L + pw / 2}" y="{H - 12}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{T + ph / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {T + ph / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{W / 2}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>')
    for i, (label, (xs_, ys_)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs_, ys_) if math.isfinite(x) and math.isfinite(y))
        dash = ' stroke-dasharray="5,4"' if label in dashed else ""
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>')
        ly = T + 14 + 18 * i
        out.append(f'<line x1="{W - R + 10}" y1="{ly}" x2="{W - R + 34}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash}/>')
        out.append(f'<text x="{W - R + 40}" y="{ly + 4}" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
