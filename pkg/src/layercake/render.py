"""SVG picture of an allocation: one horizontal band per layer, top layer first."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .core import MultiAllocation

PALETTE = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"]


def agent_color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


def render_svg(alloc: MultiAllocation, names=None, extents=None, width: int = 600,
               band: int = 36, gap: int = 10) -> str:
    """Return SVG text.  ``extents`` (per-layer ``(lo, hi)``) draws the layer outline."""
    n = alloc.n
    m = len(alloc.bundles[0]) if n else 0
    names = list(names) if names is not None else [f"agent{i}" for i in range(n)]
    left, top = 70, 10
    legend_y = top + m * (band + gap) + 10
    height = legend_y + 20 * ((n + 3) // 4) + 10
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{left + width + 20}" height="{height}" '
           f'font-family="sans-serif" font-size="12">']
    for j in range(m):
        y = top + j * (band + gap)
        out.append(f'<text x="{left - 8}" y="{y + band / 2 + 4}" text-anchor="end">layer {j + 1}</text>')
        if extents is not None:
            lo, hi = extents[j]
            out.append(f'<rect class="layer" x="{left + float(lo) * width:.3f}" y="{y}" '
                       f'width="{float(hi - lo) * width:.3f}" height="{band}" fill="#eee" stroke="#999"/>')
        for i, bundle in enumerate(alloc.bundles):
            for iv in bundle[j]:
                out.append(
                    f'<rect class="piece" data-agent="{i}" data-layer="{j}" data-lo="{iv.lo}" data-hi="{iv.hi}" '
                    f'x="{left + float(iv.lo) * width:.3f}" y="{y}" width="{float(iv.hi - iv.lo) * width:.3f}" '
                    f'height="{band}" fill="{agent_color(i)}" stroke="#222" stroke-width="0.5">'
                    f'<title>{escape(names[i])}: [{iv.lo}, {iv.hi}]</title></rect>')
    for i, name in enumerate(names):
        x = left + (i % 4) * (width // 4)
        y = legend_y + 20 * (i // 4)
        out.append(f'<rect x="{x}" y="{y}" width="12" height="12" fill="{agent_color(i)}"/>')
        out.append(f'<text x="{x + 18}" y="{y + 11}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
