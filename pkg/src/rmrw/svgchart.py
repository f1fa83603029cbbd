"""Minimal self-contained SVG bar and line charts (no plotting dependency).

Charts are deterministic byte-for-byte given their inputs: floats are
formatted with a fixed precision and no timestamps or ids are embedded.
"""

import numpy as np

__all__ = ["bar_chart_svg", "line_chart_svg"]

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 60, 15, 30, 45
_PALETTE = ["#4878a8", "#d1605e", "#6aa56e", "#b8860b"]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return raw


def _axes(lo_x, hi_x, lo_y, hi_y, title, xlabel, ylabel):
    parts = []
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + pw * (v - lo_x) / (hi_x - lo_x)

    def sy(v):
        return _MT + ph * (1.0 - (v - lo_y) / (hi_y - lo_y))

    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>')
    for v in _ticks(lo_x, hi_x):
        x = sx(v)
        parts.append(f'<line x1="{_fmt(x)}" y1="{_H - _MB}" x2="{_fmt(x)}" y2="{_H - _MB + 5}" stroke="#333"/>')
        parts.append(
            f'<text x="{_fmt(x)}" y="{_H - _MB + 18}" font-size="11" text-anchor="middle">{_fmt(v)}</text>'
        )
    for v in _ticks(lo_y, hi_y):
        y = sy(v)
        parts.append(f'<line x1="{_ML - 5}" y1="{_fmt(y)}" x2="{_ML}" y2="{_fmt(y)}" stroke="#333"/>')
        parts.append(
            f'<text x="{_ML - 8}" y="{_fmt(y + 4)}" font-size="11" text-anchor="end">{_fmt(v)}</text>'
        )
    parts.append(f'<text x="{_W // 2}" y="18" font-size="13" text-anchor="middle">{title}</text>')
    parts.append(f'<text x="{_W // 2}" y="{_H - 8}" font-size="12" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="14" y="{_H // 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {_H // 2})">{ylabel}</text>'
    )
    return parts, sx, sy


def bar_chart_svg(edges, counts, title: str = "", xlabel: str = "", ylabel: str = "count",
                  comment: str | None = None) -> str:
    """Histogram as an SVG bar chart; edges has one more entry than counts."""
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=float)
    hi_y = float(counts.max()) if counts.size and counts.max() > 0 else 1.0
    parts, sx, sy = _axes(float(edges[0]), float(edges[-1]), 0.0, 1.05 * hi_y, title, xlabel, ylabel)
    bars = []
    y0 = sy(0.0)
    for k in range(len(counts)):
        if counts[k] <= 0:
            continue
        x = sx(edges[k])
        w = sx(edges[k + 1]) - x
        y = sy(float(counts[k]))
        bars.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(y0 - y)}" '
            f'fill="{_PALETTE[0]}" stroke="none"/>'
        )
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">'
    com = f"<!-- {comment} -->\n" if comment else ""
    return com + head + "\n" + "\n".join(bars + parts) + "\n</svg>\n"


def line_chart_svg(x, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
                   comment: str | None = None) -> str:
    """One or more named series against a common x axis."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    lo_y = min(float(v.min()) for v in ys.values())
    hi_y = max(float(v.max()) for v in ys.values())
    if hi_y == lo_y:
        hi_y = lo_y + 1.0
    pad = 0.05 * (hi_y - lo_y)
    parts, sx, sy = _axes(float(x[0]), float(x[-1]), lo_y - pad, hi_y + pad, title, xlabel, ylabel)
    lines = []
    for i, (name, v) in enumerate(ys.items()):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, v))
        lines.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        lines.append(
            f'<text x="{_W - _MR - 5}" y="{_MT + 16 + 14 * i}" font-size="11" text-anchor="end" '
            f'fill="{color}">{name}</text>'
        )
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">'
    com = f"<!-- {comment} -->\n" if comment else ""
    return com + head + "\n" + "\n".join(lines + parts) + "\n</svg>\n"
