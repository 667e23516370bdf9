"""Tiny dependency-free SVG line plot writer."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)


def line_plot(series: list[tuple[np.ndarray, np.ndarray, str, str]], *, xlabel="", ylabel="",
              title="", width=640, height=420) -> str:
    """Render ``(x, y, label, style)`` curves; style is ``"solid"`` or ``"dashed"``."""
    ml, mr, mt, mb = 70, 20, 30, 50
    xs = np.concatenate([np.asarray(s[0], float) for s in series])
    ys = np.concatenate([np.asarray(s[1], float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = 0.0 if ys.min() >= 0 else float(ys.min()), float(ys.max()) * 1.05
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def px(x):
        return ml + (x - x0) / (x1 - x0) * (width - ml - mr)

    def py(y):
        return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
           f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>']
    for tx in _ticks(x0, x1):
        if x0 <= tx <= x1:
            out.append(f'<line x1="{px(tx):.2f}" y1="{height - mb}" x2="{px(tx):.2f}" '
                       f'y2="{height - mb + 5}" stroke="black"/>')
            out.append(f'<text x="{px(tx):.2f}" y="{height - mb + 18}" text-anchor="middle">{tx:g}</text>')
    for ty in _ticks(y0, y1):
        if y0 <= ty <= y1:
            out.append(f'<line x1="{ml - 5}" y1="{py(ty):.2f}" x2="{ml}" y2="{py(ty):.2f}" stroke="black"/>')
            out.append(f'<text x="{ml - 8}" y="{py(ty) + 4:.2f}" text-anchor="end">{ty:g}</text>')
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    for i, (x, y, label, style) in enumerate(series):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        dash = ' stroke-dasharray="6,4"' if style == "dashed" else ""
        color = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{pts}"/>')
        out.append(f'<text x="{width - mr - 150}" y="{mt + 15 * (i + 1)}" fill="{color}">{escape(label)}</text>')
    out.append(f'<text x="{(ml + width - mr) / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{(mt + height - mb) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {(mt + height - mb) / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{(ml + width - mr) / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
