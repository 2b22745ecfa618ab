"""Deterministic SVG pictures of cones in the projectivised positive chamber.

A non-zero ``v`` in the chamber is drawn at the barycentric point
``(alpha_1(v), ..., alpha_r(v)) / sum_i alpha_i(v)``. For SL(4) this is a
triangle whose bottom edge is ``ker alpha_2``, left edge ``ker alpha_1`` and
right edge ``ker alpha_3``. SL(3) gives a segment and SL(2) a single point.
Coordinates are printed with fixed precision so identical inputs give
identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .cartan import simple_root
from .cones import HalfSpaceCone, SampledCone
from .errors import InvalidInputError

__all__ = ["simplex_coords", "cone_layers", "render_svg", "write_svg"]

SIZE = 420
MARGIN = 40
PALETTE = ("#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#555555")


def simplex_coords(v, tol=1e-12):
    """Normalised simple-root values of chamber vectors; rows outside the chamber are nan."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = v.shape[1]
    a = np.stack([simple_root(i, v) for i in range(1, n)], axis=1)
    scale = np.linalg.norm(v, axis=1)
    s = a.sum(axis=1)
    bad = np.any(a < -tol * np.maximum(scale, 1.0)[:, None], axis=1) | (s <= tol * np.maximum(scale, 1.0))
    out = np.clip(a, 0.0, None) / np.where(bad, 1.0, s)[:, None]
    out[bad] = np.nan
    return out


def _corners(n):
    lo, hi = MARGIN, SIZE - MARGIN
    if n == 4:
        # columns: where alpha_1, alpha_2, alpha_3 are the only non-zero value
        height = (hi - lo) * np.sqrt(3) / 2
        top = (SIZE - height) / 2
        bottom = top + height
        return np.array([[hi, bottom], [(lo + hi) / 2, top], [lo, bottom]])
    if n == 3:
        mid = SIZE / 2
        return np.array([[hi, mid], [lo, mid]])
    if n == 2:
        return np.array([[SIZE / 2, SIZE / 2]])
    raise InvalidInputError("pictures are only drawn for SL(2), SL(3) and SL(4); use CSV output")


def _to_xy(bary, n):
    return bary @ _corners(n)


def _fmt(x):
    return f"{x:.2f}"


def _order_polygon(xy):
    c = xy.mean(axis=0)
    ang = np.arctan2(xy[:, 1] - c[1], xy[:, 0] - c[0])
    return xy[np.argsort(ang, kind="stable")]


def cone_layers(cone, label=None, color=None):
    """Drawable layers for a sampled, half-space or folded subgroup cone."""
    from .subgroups import FoldedSubgroupCone

    layers = []
    if isinstance(cone, FoldedSubgroupCone):
        if cone.exact_pieces:
            for k, piece in enumerate(cone.exact_pieces):
                layers.append({"kind": "polygon", "vectors": piece.extreme_rays(),
                               "label": f"{label or cone.name or 'H'} piece {k + 1}", "color": color})
        else:
            layers.append({"kind": "points", "vectors": cone.folded.directions,
                           "label": label or cone.name, "color": color})
    elif isinstance(cone, HalfSpaceCone):
        layers.append({"kind": "polygon", "vectors": cone.extreme_rays(), "label": label, "color": color})
    elif isinstance(cone, SampledCone):
        layers.append({"kind": "points", "vectors": cone.directions, "label": label, "color": color})
    else:
        raise InvalidInputError(f"cannot draw {type(cone).__name__}")
    return layers


def render_svg(layers, n=4, title=None):
    """SVG 1.1 text for the given layers (see :func:`cone_layers`)."""
    corners = _corners(n)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{SIZE / 2:.2f}" y="20.00" text-anchor="middle" font-size="14">{_escape(title)}</text>')
    if n == 4:
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in corners)
        out.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1"/>')
        # edge labels: bottom = ker alpha_2, left = ker alpha_1, right = ker alpha_3
        for (i, j), name, dy in (((0, 2), "ker α2", 18), ((1, 2), "ker α1", 0), ((0, 1), "ker α3", 0)):
            mx, my = (corners[i] + corners[j]) / 2
            dx = {"ker α1": -34, "ker α3": 34, "ker α2": 0}[name]
            out.append(f'<text x="{_fmt(mx + dx)}" y="{_fmt(my + dy)}" text-anchor="middle" '
                       f'font-size="12">{name}</text>')
    elif n == 3:
        (x0, y0), (x1, y1) = corners
        out.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" stroke="black"/>')
    skipped = 0
    for k, layer in enumerate(layers):
        color = layer.get("color") or PALETTE[k % len(PALETTE)]
        bary = simplex_coords(layer["vectors"])
        ok = ~np.isnan(bary).any(axis=1)
        skipped += int((~ok).sum())
        xy = _to_xy(bary[ok], n)
        if len(xy) == 0:
            continue
        label = layer.get("label")
        out.append(f'<g id="layer{k}"' + (f' data-label="{_escape(label)}"' if label else "") + ">")
        if layer["kind"] == "points":
            keys = np.unique(np.round(xy, 1), axis=0)
            for x, y in keys:
                out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="1.6" fill="{color}"/>')
        else:
            uniq = np.unique(np.round(xy, 6), axis=0)
            if len(uniq) == 1:
                x, y = uniq[0]
                out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="{color}"/>')
            elif len(uniq) == 2:
                (x0, y0), (x1, y1) = uniq
                out.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
                           f'stroke="{color}" stroke-width="2.5"/>')
            else:
                pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in _order_polygon(uniq))
                out.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="0.3" stroke="{color}"/>')
        out.append("</g>")
    if skipped:
        out.append(f"<!-- {skipped} directions outside the chamber were not drawn -->")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def write_svg(path, layers, n=4, title=None):
    text = render_svg(layers, n, title)
    Path(path).write_text(text, encoding="utf-8")
    return text
