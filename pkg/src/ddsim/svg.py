"""
Dependency-free SVG rendering of scan results.

Heatmaps use a fixed five-stop viridis approximation (#440154, #3b528b,
#21918c, #5ec962, #fde725) over an explicit clipping range; cells outside the
range are drawn white. Line plots show the signal in red and, when present,
the ideal reference trace as a green dash-dotted line.
"""

from xml.sax.saxutils import escape

import numpy as np

__all__ = ["VIRIDIS_STOPS", "colormap", "render_svg"]

VIRIDIS_STOPS = ("#440154", "#3b528b", "#21918c", "#5ec962", "#fde725")
_RGB = np.array([[int(c[i:i + 2], 16) for i in (1, 3, 5)] for c in VIRIDIS_STOPS], dtype=float)

_W, _H = 640, 520
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 110, 30, 60


def colormap(x):
    """Map ``x`` in [0, 1] to a hex color by piecewise-linear interpolation."""
    x = min(1.0, max(0.0, float(x)))
    pos = x * (len(_RGB) - 1)
    k = min(int(pos), len(_RGB) - 2)
    rgb = _RGB[k] + (pos - k) * (_RGB[k + 1] - _RGB[k])
    return "#" + "".join(f"{int(round(c)):02x}" for c in rgb)


def _fmt(x):
    return f"{x:.4g}"


def _header(title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]


def _axes(parts, x_label, y_label, x_range, y_range, pw, ph):
    x0, y0 = _LEFT, _TOP + ph
    parts.append(f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for k in range(5):
        fx = k / 4
        xv = x_range[0] + fx * (x_range[1] - x_range[0])
        yv = y_range[0] + fx * (y_range[1] - y_range[0])
        px, py = x0 + fx * pw, y0 - fx * ph
        parts.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{y0 + 18}" text-anchor="middle">{_fmt(xv)}</text>')
        parts.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(yv)}</text>')
    parts.append(f'<text x="{x0 + pw / 2}" y="{_H - 15}" text-anchor="middle">{escape(x_label)}</text>')
    parts.append(f'<text x="20" y="{_TOP + ph / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 20 {_TOP + ph / 2})">{escape(y_label)}</text>')


def _span(axis):
    lo, hi = float(axis[0]), float(axis[-1])
    return (lo - 0.5, hi + 0.5) if hi == lo else (lo, hi)


def _heatmap(result, title, clip):
    (x_name, x), (y_name, y) = list(result.axes.items())[:2]
    values = np.asarray(result.values, dtype=float)
    finite = values[np.isfinite(values)]
    lo, hi = clip if clip is not None else (
        (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0))
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    parts = _header(title)
    nx, ny = values.shape
    cw, chh = pw / nx, ph / ny
    for i in range(nx):
        for j in range(ny):
            v = values[i, j]
            if not np.isfinite(v) or v < lo or v > hi:
                color = "#ffffff"
            else:
                color = colormap(0.5 if hi == lo else (v - lo) / (hi - lo))
            px, py = _LEFT + i * cw, _TOP + ph - (j + 1) * chh
            parts.append(f'<rect x="{px:.2f}" y="{py:.2f}" width="{cw + 0.05:.2f}" height="{chh + 0.05:.2f}" '
                         f'fill="{color}"/>')
    labels = {"detuning_over_omega": "detuning (Ω)", "relative_amp_error": "amplitude error"}
    _axes(parts, labels.get(x_name, x_name), labels.get(y_name, y_name), _span(x), _span(y), pw, ph)
    # color bar
    bx = _W - _RIGHT + 25
    steps = 50
    for k in range(steps):
        frac = k / (steps - 1)
        py = _TOP + ph - (k + 1) * ph / steps
        parts.append(f'<rect x="{bx}" y="{py:.2f}" width="18" height="{ph / steps + 0.05:.2f}" '
                     f'fill="{colormap(0.5 if hi == lo else frac)}"/>')
    parts.append(f'<text x="{bx + 22}" y="{_TOP + ph}" >{_fmt(lo)}</text>')
    parts.append(f'<text x="{bx + 22}" y="{_TOP + 10}">{_fmt(hi)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _lineplot(result, title, clip):
    (x_name, x), = list(result.axes.items())[:1]
    x = np.asarray(x, dtype=float)
    traces = [("signal", np.asarray(result.values, dtype=float), 'stroke="#d62728" stroke-width="1.5"')]
    if "signal_ideal" in result.extra:
        traces.append(("ideal", np.asarray(result.extra["signal_ideal"], dtype=float),
                       'stroke="#2ca02c" stroke-width="1.5" stroke-dasharray="8,3,2,3"'))
    allv = np.concatenate([t for _, t, _ in traces])
    allv = allv[np.isfinite(allv)]
    lo, hi = clip if clip is not None else ((float(allv.min()), float(allv.max())) if allv.size else (0.0, 1.0))
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    xr = _span(x)
    pw, ph = _W - _LEFT - 40, _H - _TOP - _BOTTOM
    parts = _header(title)
    for name, vals, style in traces:
        pts = []
        for xv, yv in zip(x, vals):
            if not np.isfinite(yv):
                continue
            px = _LEFT + (xv - xr[0]) / (xr[1] - xr[0]) * pw
            py = _TOP + ph - (min(max(yv, lo), hi) - lo) / (hi - lo) * ph
            pts.append(f"{px:.2f},{py:.2f}")
        parts.append(f'<polyline fill="none" {style} points="{" ".join(pts)}"><title>{name}</title></polyline>')
    labels = {"dd_frequency_khz": "DD frequency (kHz)"}
    _axes(parts, labels.get(x_name, x_name), "population", xr, (lo, hi), pw, ph)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_svg(result, title="", clip=None):
    """
    Render a 1-D result as a line plot or a 2-D result as a heatmap.

    ``clip=(lo, hi)`` fixes the value range; by default the data range is used.
    Returns ``None`` when the result has no usable axis (callers then skip the plot).
    """
    values = np.asarray(result.values)
    if values.size == 0 or values.ndim not in (1, 2):
        return None
    if values.ndim == 2:
        return _heatmap(result, title, clip)
    return _lineplot(result, title, clip)
