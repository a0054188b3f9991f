"""Minimal self-contained SVG rendering of a B-plot with barrier strips."""

from __future__ import annotations

import json
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .grid import N_BUCKETS, BarPlot


def bplot_svg(
    plot: BarPlot,
    barriers: list | None = None,
    meta: dict | None = None,
    width: int = 800,
    height: int = 400,
) -> str:
    """Bars over the grid, one shaded strip per decile from the barrier down, decile ticks.

    Bars lying below their bucket barrier are drawn in a contrasting colour.
    """
    pad = 40
    p = plot.grid.points
    bars = plot.bars
    vals = [0.0, *bars.tolist(), *(b for b in (barriers or []) if b is not None)]
    lo, hi = min(vals), max(vals)
    span = (hi - lo) or 1.0
    lo -= 0.05 * span
    hi += 0.05 * span

    def sx(v):
        return pad + v * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad)

    buckets = plot.grid.bucket_index()
    bw = max(1.0, 0.8 * (width - 2 * pad) / plot.grid.denom)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f"<desc>{escape(json.dumps(meta or {}, sort_keys=True))}</desc>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for k in range(N_BUCKETS):
        b = barriers[k] if barriers else None
        if b is None:
            continue
        x0, x1 = sx(k / N_BUCKETS), sx((k + 1) / N_BUCKETS)
        out.append(
            f'<rect class="strip" x="{x0:.2f}" y="{sy(b):.2f}" width="{x1 - x0:.2f}" '
            f'height="{sy(lo) - sy(b):.2f}" fill="#f4c7c3" fill-opacity="0.6"/>'
        )
    zero = sy(0.0)
    for pi, v, k in zip(p, bars, buckets):
        b = barriers[k - 1] if barriers else None
        flagged = b is not None and v < b
        top, bottom = (sy(v), zero) if v >= 0 else (zero, sy(v))
        colour = "#c0392b" if flagged else "#2c6fbb"
        out.append(
            f'<rect class="{"bar flagged" if flagged else "bar"}" x="{sx(pi) - bw / 2:.2f}" y="{top:.2f}" '
            f'width="{bw:.2f}" height="{max(bottom - top, 0.5):.2f}" fill="{colour}"/>'
        )
    out.append(f'<line x1="{pad}" y1="{zero:.2f}" x2="{width - pad}" y2="{zero:.2f}" stroke="black"/>')
    for t in np.linspace(0, 1, N_BUCKETS + 1):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{height - pad}" x2="{x:.2f}" y2="{height - pad + 5}" stroke="black"/>')
        out.append(
            f'<text x="{x:.2f}" y="{height - pad + 18}" font-size="11" text-anchor="middle">{t:.1f}</text>'
        )
    out.append(
        f'<text x="{pad}" y="{pad - 12}" font-size="13">{escape(plot.kind)}-bars, '
        f"m={plot.m}, n={plot.n}, D={plot.grid.d}</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_bplot_svg(path: str | Path, plot: BarPlot, barriers=None, meta=None) -> None:
    Path(path).write_text(bplot_svg(plot, barriers, meta), encoding="utf-8")
