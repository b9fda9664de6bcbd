"""Minimal SVG line plots for cumulative curve files; no plotting deps."""

from __future__ import annotations

import numpy as np

__all__ = ["render_curves_svg"]

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 40, 48
COLORS = ("#1a1a1a", "#c23b22", "#2c6fbb", "#3a7d44", "#8a5fbf")


def _ticks(vmax: float, count: int = 5) -> list[float]:
    if vmax <= 0:
        return [0.0, 1.0]
    raw = vmax / count
    mag = 10 ** np.floor(np.log10(raw))
    step = float(min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw))
    return list(np.arange(0.0, vmax + 0.5 * step, step))


def render_curves_svg(curves: list[tuple[str, np.ndarray, bool]],
                      title: str = "", xlabel: str = "examples",
                      ylabel: str = "cumulative count") -> str:
    """Render (label, values, dashed) curves against their 1-based index."""
    if not curves:
        raise ValueError("need at least one curve")
    n = max(len(v) for _, v, _ in curves)
    ymax = max(float(np.max(v)) for _, v, _ in curves if len(v))
    ymax = max(ymax, 1.0)
    yticks = _ticks(ymax)
    ymax = yticks[-1]

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(i):
        return MARGIN_L + plot_w * (i / max(n - 1, 1))

    def sy(v):
        return MARGIN_T + plot_h * (1.0 - v / ymax)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
    ]

    for t in yticks:
        yy = sy(t)
        parts.append(f'<line x1="{MARGIN_L}" y1="{yy:.1f}" x2="{WIDTH - MARGIN_R}" '
                     f'y2="{yy:.1f}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{MARGIN_L - 6}" y="{yy + 4:.1f}" text-anchor="end">{t:g}</text>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        i = frac * max(n - 1, 1)
        parts.append(f'<text x="{sx(i):.1f}" y="{HEIGHT - MARGIN_B + 18}" '
                     f'text-anchor="middle">{int(round(frac * n))}</text>')

    parts.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
                 f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>')
    parts.append(f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
                 f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>')
    parts.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {HEIGHT / 2:.0f})">{ylabel}</text>')

    for ci, (label, values, dashed) in enumerate(curves):
        color = COLORS[ci % len(COLORS)]
        pts = " ".join(f"{sx(i):.1f},{sy(float(v)):.1f}" for i, v in enumerate(values))
        dash = ' stroke-dasharray="7,4"' if dashed else ""
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.6"{dash}/>')
        ly = MARGIN_T + 16 + 18 * ci
        parts.append(f'<line x1="{MARGIN_L + 10}" y1="{ly - 4}" x2="{MARGIN_L + 40}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="1.6"{dash}/>')
        parts.append(f'<text x="{MARGIN_L + 46}" y="{ly}">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
