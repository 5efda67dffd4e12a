"""Deterministic SVG drawings of a network, its sample and witness balls."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import quoteattr

import numpy as np

from .energy import CompactSample, PointClassification
from .network import Network


def _f(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(net: Network | None, M: CompactSample, classes: list[PointClassification] | None = None,
               width: int = 800) -> str:
    """SVG text: network strokes, sample dots, r-circles around witnesses of energetic points.

    The view box is the bounding box of the r-neighbourhood of the sample's
    convex hull.  The y axis points up.
    """
    r = M.r
    lo = M.points.min(axis=0) - r
    hi = M.points.max(axis=0) + r
    if net is not None:
        lo = np.minimum(lo, net.vertices.min(axis=0))
        hi = np.maximum(hi, net.vertices.max(axis=0))
    span = hi - lo
    pad = 0.02 * span.max()
    lo, hi = lo - pad, hi + pad
    span = hi - lo
    height = max(1, int(round(width * span[1] / span[0]))) if span[0] > 0 else width
    dot = 0.004 * span.max()
    X = lambda p: _f(p[0])
    Y = lambda p: _f(lo[1] + hi[1] - p[1])  # flip so that y points up
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{_f(lo[0])} {_f(lo[1])} {_f(span[0])} {_f(span[1])}">',
    ]
    witnesses = []
    if classes:
        for c in classes:
            if c.energetic:
                witnesses.extend(map(tuple, c.corresponding))
    for y in sorted(set(witnesses)):
        out.append(f'<circle class="witness" cx="{X(y)}" cy="{Y(y)}" r="{_f(r)}" fill="none" '
                   f'stroke="#9ab" stroke-width="{_f(dot / 2)}"/>')
    if net is not None and len(net.edges):
        d = " ".join(f"M{X(net.vertices[i])} {Y(net.vertices[i])}L{X(net.vertices[j])} {Y(net.vertices[j])}"
                     for i, j in net.edges)
        out.append(f'<path class="network" d={quoteattr(d)} fill="none" stroke="#c22" '
                   f'stroke-width="{_f(dot)}" stroke-linecap="round"/>')
    elif net is not None:
        v = net.vertices[0]
        out.append(f'<circle class="network" cx="{X(v)}" cy="{Y(v)}" r="{_f(2 * dot)}" fill="#c22"/>')
    for p in M.points:
        out.append(f'<circle class="sample" cx="{X(p)}" cy="{Y(p)}" r="{_f(dot)}" fill="#222"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(net: Network | None, M: CompactSample, path, classes: list[PointClassification] | None = None) -> str:
    text = render_svg(net, M, classes)
    Path(path).write_text(text)
    return text
