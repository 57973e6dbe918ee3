"""Hand-emitted SVG renderers for heat maps, curves, and scatter plots.

The color ramp is fixed so that re-renders of identical data are
byte-identical: a symmetric blue-white-red diverging ramp for signed values,
mapped linearly over [-limit, +limit] where limit is the largest |value|.
"""

from __future__ import annotations

import math

import numpy as np

_PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
)


def _ramp(value: float, limit: float) -> str:
    """Blue (negative) -> white (zero) -> red (positive)."""
    if limit <= 0:
        t = 0.0
    else:
        t = max(-1.0, min(1.0, value / limit))
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t)), round(255 * (1 - t))
    else:
        r, g, b = round(255 * (1 + t)), round(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(values, cell: int = 1, title: str = "") -> str:
    """One rect per cell; the SVG grid has exactly the array's dimensions."""
    arr = np.asarray(values, dtype=np.float64)
    h, w = arr.shape
    limit = float(np.abs(arr).max())
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell}" '
        f'height="{h * cell}" viewBox="0 0 {w * cell} {h * cell}" '
        f'shape-rendering="crispEdges" data-cells="{h}x{w}">'
    ]
    if title:
        parts.append(f"<title>{title}</title>")
    parts.append(f'<rect width="{w * cell}" height="{h * cell}" fill="#ffffff"/>')
    for i in range(h):
        row = arr[i]
        for j in range(w):
            color = _ramp(float(row[j]), limit)
            if color == "#ffffff":
                continue
            parts.append(
                f'<rect x="{j * cell}" y="{i * cell}" width="{cell}" '
                f'height="{cell}" fill="{color}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def _axes(width: int, height: int, margin: int) -> str:
    x0, y0 = margin, height - margin
    x1, y1 = width - margin, margin
    return (
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#000"/>'
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#000"/>'
    )


def curve_svg(points, width: int = 480, height: int = 480, title: str = "") -> str:
    """Polyline through (x, y) pairs with x and y in [0, 1]."""
    margin = 40
    span_x = width - 2 * margin
    span_y = height - 2 * margin
    coords = []
    for x, y in points:
        px = margin + x * span_x
        py = height - margin - y * span_y
        coords.append(f"{px:.2f},{py:.2f}")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        _axes(width, height, margin),
    ]
    if title:
        parts.append(
            f'<text x="{width // 2}" y="{margin // 2}" text-anchor="middle" '
            f'font-size="14">{title}</text>'
        )
    parts.append(
        f'<polyline points="{" ".join(coords)}" fill="none" '
        f'stroke="#d62728" stroke-width="1.5"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


def scatter_svg(
    groups: dict,
    width: int = 560,
    height: int = 480,
    title: str = "",
    log_floor: float = 1e-2,
) -> str:
    """Grouped 1-D scatter: one column per group, log10(|value|) on y.

    `groups` maps a group name to a list of values; sign is shown by marker
    fill (negative values hollow).
    """
    margin = 40
    names = sorted(groups)
    all_values = [abs(v) for vs in groups.values() for v in vs]
    top = max(max(all_values, default=1.0), log_floor)
    y_lo = math.log10(log_floor)
    y_hi = math.log10(top) + 0.5
    span_y = height - 2 * margin
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        _axes(width, height, margin),
    ]
    if title:
        parts.append(
            f'<text x="{width // 2}" y="{margin // 2}" text-anchor="middle" '
            f'font-size="14">{title}</text>'
        )
    slot = (width - 2 * margin) / max(len(names), 1)
    for gi, name in enumerate(names):
        color = _PALETTE[gi % len(_PALETTE)]
        x_center = margin + slot * (gi + 0.5)
        parts.append(
            f'<text x="{x_center:.1f}" y="{height - margin + 16}" '
            f'text-anchor="middle" font-size="11">{name}</text>'
        )
        for vi, value in enumerate(groups[name]):
            mag = max(abs(value), log_floor)
            frac = (math.log10(mag) - y_lo) / (y_hi - y_lo)
            py = height - margin - frac * span_y
            jitter = ((vi * 2654435761) % 1000) / 1000.0 - 0.5
            px = x_center + jitter * slot * 0.6
            fill = color if value >= 0 else "none"
            parts.append(
                f'<circle cx="{px:.1f}" cy="{py:.1f}" r="3" fill="{fill}" '
                f'stroke="{color}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def shift_field_svg(shifts, confidences, cell: int = 24, title: str = "") -> str:
    """Arrow per grid cell showing (d1, d2); opacity tracks confidence."""
    s = np.asarray(shifts)
    conf = np.asarray(confidences, dtype=np.float64)
    gh, gw = conf.shape
    top = float(conf.max()) if conf.size else 0.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{gw * cell}" '
        f'height="{gh * cell}" data-cells="{gh}x{gw}">',
        f'<rect width="{gw * cell}" height="{gh * cell}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(f"<title>{title}</title>")
    longest = max(1.0, float(np.abs(s).max()))
    for gi in range(gh):
        for gj in range(gw):
            cx = gj * cell + cell / 2
            cy = gi * cell + cell / 2
            d1, d2 = (float(v) for v in s[gi, gj])
            opacity = 0.25 + 0.75 * (conf[gi, gj] / top if top > 0 else 0.0)
            parts.append(
                f'<rect x="{gj * cell}" y="{gi * cell}" width="{cell}" '
                f'height="{cell}" fill="none" stroke="#dddddd"/>'
            )
            if d1 == 0 and d2 == 0:
                parts.append(
                    f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="1.5" '
                    f'fill="#444444" fill-opacity="{opacity:.3f}"/>'
                )
                continue
            scale = 0.4 * cell / longest
            parts.append(
                f'<line x1="{cx:.1f}" y1="{cy:.1f}" '
                f'x2="{cx + d2 * scale:.1f}" y2="{cy + d1 * scale:.1f}" '
                f'stroke="#d62728" stroke-opacity="{opacity:.3f}" stroke-width="2"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
