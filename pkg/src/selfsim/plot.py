"""SVG pictures of attractors and orbit sets, and CSV export of the word grid.

Plain SVG text is written directly; there is no plotting dependency.
"""
from __future__ import annotations

import csv
import io
from fractions import Fraction

import numpy as np

from .attractor import float_grid, words
from .exact import format_scalar
from .ifs import SelfSimilarSystem, compose
from .singularity import branch_points, orbit_set

__all__ = ["attractor_svg", "grid_csv", "LEVEL_COLORS"]

LEVEL_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2")

SIZE = 480
MARGIN = 24


def _frame(points: np.ndarray):
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    span = float(max(np.max(hi - lo), 1e-12))
    scale = (SIZE - 2 * MARGIN) / span

    def to_px(p):
        x = MARGIN + (p[0] - lo[0]) * scale
        y = SIZE - MARGIN - ((p[1] - lo[1]) * scale if len(p) > 1 else 0.0)
        return x, y

    return to_px


def _overlays(system: SelfSimilarSystem, base, levels):
    """``[(level, points)]`` for the requested orbit sets."""
    bases = [tuple(base)] if base is not None else branch_points(system).branch_points
    out = []
    for b in bases:
        for n in levels:
            out.append((n, system.to_float(list(orbit_set(system, b, n)))))
    return out


def attractor_svg(system: SelfSimilarSystem, depth: int, what: str = "grid", base=None,
                  levels=(0, 1, 2)) -> str:
    """Scatter of the depth-``depth`` grid (2-D) or a measure histogram (1-D).

    ``what="orbits"`` overlays orbit sets, colored by level; ``base`` limits
    them to one branch point.
    """
    if what not in ("grid", "orbits", "measure"):
        raise ValueError(f"unknown plot kind {what!r}")
    if system.dimension not in (1, 2):
        raise ValueError("only 1-D and 2-D systems can be plotted")
    pts = float_grid(system, depth)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
           f'viewBox="0 0 {SIZE} {SIZE}">',
           f'<title>{system.name} depth {depth}</title>',
           f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>']
    to_px = _frame(pts)
    if system.dimension == 1:
        out += _histogram(pts)
    else:
        r = 1.0 if what != "measure" else 1.4
        uniq, counts = np.unique(np.round(pts, 12), axis=0, return_counts=True)
        for p, c in zip(uniq, counts):
            x, y = to_px(p)
            op = 0.5 if what != "measure" else min(1.0, 0.3 + 0.2 * c)
            out.append(f'<circle class="grid" cx="{x:.3f}" cy="{y:.3f}" r="{r}" fill="#555" '
                       f'fill-opacity="{op}"/>')
    if what == "orbits":
        for n, opts in _overlays(system, base, levels):
            color = LEVEL_COLORS[n % len(LEVEL_COLORS)]
            for p in opts:
                x, y = to_px(p)
                out.append(f'<circle class="orbit" data-level="{n}" cx="{x:.3f}" cy="{y:.3f}" '
                           f'r="4" fill="none" stroke="{color}" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _histogram(pts, bins: int = 64) -> list:
    weights = np.full(pts.shape[0], 1.0 / pts.shape[0])
    hist, _ = np.histogram(pts[:, 0], bins=bins, weights=weights)
    top = float(hist.max()) or 1.0
    width = (SIZE - 2 * MARGIN) / bins
    out = []
    for k, h in enumerate(hist):
        hpx = (SIZE - 2 * MARGIN) * h / top
        x = MARGIN + k * width
        out.append(f'<rect class="bar" x="{x:.3f}" y="{SIZE - MARGIN - hpx:.3f}" '
                   f'width="{width:.3f}" height="{hpx:.3f}" fill="#888"/>')
    return out


def grid_csv(system: SelfSimilarSystem, depth: int) -> str:
    """Rows ``word, coordinates..., weight`` with exact coordinates and weight ``N^-depth``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["word"] + [f"x{k + 1}" for k in range(system.dimension)] + ["weight"])
    weight = Fraction(1, system.N ** depth)
    for word in words(system, depth):
        p = compose(system, word)(system.seed)
        w.writerow(["".join(map(str, word)) or "-"] + [format_scalar(c) for c in p]
                   + [format_scalar(weight)])
    return buf.getvalue()
