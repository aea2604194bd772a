"""Minimal SVG line plots for run reports (no plotting dependency)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PANEL_W, PANEL_H, MARGIN = 360, 260, 40
GREY, BLACK, RED = "#9a9a9a", "#000000", "#c0392b"


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    color: str = GREY
    width: float = 1.0
    markers: bool = False


@dataclass
class Panel:
    title: str
    series: list = field(default_factory=list)
    xlabel: str = ""
    ylabel: str = ""


def _limits(values):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _panel_svg(panel, x0):
    finite = [s for s in panel.series if len(s.x)]
    xs = np.concatenate([np.asarray(s.x, float) for s in finite]) if finite else np.zeros(1)
    ys = np.concatenate([np.asarray(s.y, float) for s in finite]) if finite else np.zeros(1)
    (xl, xh), (yl, yh) = _limits(xs), _limits(ys)
    w, h = PANEL_W - 2 * MARGIN, PANEL_H - 2 * MARGIN

    def px(x):
        return x0 + MARGIN + (np.asarray(x, float) - xl) / (xh - xl) * w

    def py(y):
        return MARGIN + h - (np.asarray(y, float) - yl) / (yh - yl) * h

    out = [f'<rect x="{x0 + MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" '
           f'stroke="{BLACK}" stroke-width="0.5"/>',
           f'<text x="{x0 + PANEL_W / 2}" y="{MARGIN - 12}" text-anchor="middle" '
           f'font-size="12">{panel.title}</text>',
           f'<text x="{x0 + PANEL_W / 2}" y="{PANEL_H - 8}" text-anchor="middle" '
           f'font-size="10">{panel.xlabel} [{xl:.3g}, {xh:.3g}]</text>',
           f'<text x="{x0 + 10}" y="{MARGIN + h / 2}" font-size="10" '
           f'transform="rotate(-90 {x0 + 10} {MARGIN + h / 2})">{panel.ylabel} '
           f'[{yl:.3g}, {yh:.3g}]</text>']
    for s in finite:
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(s.x), py(s.y)))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" '
                   f'stroke-width="{s.width}"/>' if not s.markers else "")
        if s.markers:
            out += [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{1.5 * s.width:.1f}" fill="{s.color}"/>'
                    for a, b in zip(px(s.x), py(s.y))]
    return "\n".join(o for o in out if o)


def write_svg(path, panels):
    width = PANEL_W * len(panels)
    body = "\n".join(_panel_svg(p, i * PANEL_W) for i, p in enumerate(panels))
    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {PANEL_H}" '
                 f'width="{width}" height="{PANEL_H}">\n{body}\n</svg>\n')


def curves_report(path, result):
    """Smoothed observed curves next to the synchronized curves, means in black."""
    g = result.grid
    before = Panel("observed (smoothed)", [Series(g, y) for y in result.smoothed]
                   + [Series(g, result.smoothed.mean(axis=0), BLACK, 2.0)], "t", "y")
    after = Panel("synchronized", [Series(g, z) for z in result.synchronized]
                  + [Series(g, result.synchronized.mean(axis=0), BLACK, 2.0)], "t", "Z")
    warps = Panel("warps", [Series(g, w) for w in result.warps] + [Series(g, g, BLACK, 0.5)],
                  "t", "W(t)")
    write_svg(path, [before, after, warps])


def frontier_report(path, report):
    """All grid points, the Pareto frontier and the chosen point in sigma-Sync space."""
    from .tuning import pareto_front

    pts = [p for p in report.points if np.isfinite(p.sigma) and np.isfinite(p.sync)]
    front = pareto_front(pts)
    series = [Series([p.sigma for p in pts], [p.sync for p in pts], GREY, 1.5, markers=True),
              Series([p.sigma for p in front], [p.sync for p in front], BLACK, 1.0)]
    if report.chosen is not None:
        series.append(Series([report.chosen.sigma], [report.chosen.sync], RED, 3.0, markers=True))
    write_svg(path, [Panel("Sync versus sigma", series, "sigma", "Sync (%)")])
