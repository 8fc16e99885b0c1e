"""Minimal scatter/line SVG output with axes and a legend.

Hand-rolled so reports carry no plotting-stack dependence; output is
fully deterministic (no timestamps or generator metadata).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["Series", "render_svg"]

_COLORS = ["#111111", "#2ca02c", "#d62728", "#1f77b4", "#9467bd"]


@dataclass(frozen=True)
class Series:
    label: str
    x: list[float]
    y: list[float]
    kind: str = "scatter"  # or "line"
    color: str | None = None

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("series x/y lengths differ")
        if self.kind not in ("scatter", "line"):
            raise ValueError(f"unknown series kind {self.kind!r}")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def render_svg(
    series: list[Series],
    x_label: str,
    y_label: str,
    title: str = "",
    width: int = 640,
    height: int = 480,
) -> str:
    """Render series into a standalone SVG document string."""
    if not series:
        raise ValueError("nothing to plot")
    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y]
    if not xs:
        raise ValueError("all series are empty")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = (x_hi - x_lo) * 0.05 or 1.0
    y_pad = (y_hi - y_lo) * 0.05 or 1.0
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    m_left, m_right, m_top, m_bottom = 64, 16, 32, 48
    pw, ph = width - m_left - m_right, height - m_top - m_bottom

    def px(x: float) -> float:
        return m_left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        return m_top + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{m_left}" y="{m_top}" width="{pw}" height="{ph}" fill="none" '
        'stroke="#888888" stroke-width="1"/>',
    ]
    if title:
        out.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for t in _ticks(x_lo, x_hi):
        out.append(
            f'<line x1="{px(t):.2f}" y1="{m_top + ph}" x2="{px(t):.2f}" '
            f'y2="{m_top + ph + 5}" stroke="#444444"/>'
        )
        out.append(
            f'<text x="{px(t):.2f}" y="{m_top + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:g}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        out.append(
            f'<line x1="{m_left - 5}" y1="{py(t):.2f}" x2="{m_left}" y2="{py(t):.2f}" '
            'stroke="#444444"/>'
        )
        out.append(
            f'<text x="{m_left - 8}" y="{py(t):.2f}" text-anchor="end" dy="0.35em" '
            f'font-family="sans-serif" font-size="11">{t:g}</text>'
        )
    out.append(
        f'<text x="{m_left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>'
    )
    out.append(
        f'<text x="16" y="{m_top + ph / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {m_top + ph / 2:.1f})">{y_label}</text>'
    )

    for i, s in enumerate(series):
        color = s.color or _COLORS[i % len(_COLORS)]
        if s.kind == "line":
            pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y))
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        else:
            for x, y in zip(s.x, s.y):
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')

    ly = m_top + 12
    for i, s in enumerate(series):
        color = s.color or _COLORS[i % len(_COLORS)]
        out.append(
            f'<rect x="{m_left + pw - 150}" y="{ly - 8}" width="10" height="10" fill="{color}"/>'
        )
        out.append(
            f'<text x="{m_left + pw - 134}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{s.label}</text>'
        )
        ly += 16
    out.append("</svg>")
    return "\n".join(out)
