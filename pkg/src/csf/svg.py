"""Deterministic SVG rendering of feature maps and benchmark curves.

Only plain string formatting is used (fixed decimal places, fixed element
order), so identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .corners import METHODS, FeatureMap, line_to_polar
from .scan import PolarScan

#: Mahalanobis radius of the drawn covariance ellipses.
ELLIPSE_SIGMAS = 3.0
_COLORS = {"wclm": "#1f77b4", "arras": "#2ca02c", "siadat": "#d62728", "arras_fast": "#9467bd"}


def _n(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def covariance_ellipse(cov: np.ndarray, k: float = ELLIPSE_SIGMAS) -> tuple[float, float, float]:
    """Semi-axes ``(a >= b)`` and orientation (rad) of the ``k``-sigma contour."""
    lam, vec = np.linalg.eigh(0.5 * (np.asarray(cov) + np.asarray(cov).T))
    lam = np.clip(lam, 0.0, None)
    return k * math.sqrt(lam[1]), k * math.sqrt(lam[0]), math.atan2(vec[1, 1], vec[0, 1])


class _Frame:
    """World (m, y up) to pixel (y down) transform fitted around a point set."""

    def __init__(self, x, y, width: float = 800.0, margin: float = 40.0):
        x = np.append(np.asarray(x, dtype=float), 0.0)
        y = np.append(np.asarray(y, dtype=float), 0.0)
        xmin, xmax, ymin, ymax = x.min(), x.max(), y.min(), y.max()
        span = max(xmax - xmin, ymax - ymin, 1e-6)
        self.scale = (width - 2 * margin) / span
        self.x0, self.y1, self.margin = xmin, ymax, margin
        self.width = width
        self.height = 2 * margin + (ymax - ymin) * self.scale

    def px(self, x: float, y: float) -> tuple[str, str]:
        return (_n(self.margin + (x - self.x0) * self.scale),
                _n(self.margin + (self.y1 - y) * self.scale))


def _line_segment(line, x, y):
    """Project the span's extreme points onto the fitted line."""
    r, alpha = line_to_polar(line)
    nx, ny = math.cos(alpha), math.sin(alpha)
    tx, ty = -ny, nx
    t = x * tx + y * ty
    p0, p1 = (r * nx + t.min() * tx, r * ny + t.min() * ty), (r * nx + t.max() * tx, r * ny + t.max() * ty)
    return p0, p1


def map_svg(fmap: FeatureMap, scan: PolarScan, title: str | None = None) -> str:
    """Points as dots, fitted lines as strokes, corners as triangles with 3-sigma ellipses."""
    x, y = scan.cartesian()
    f = _Frame(x, y)
    color = _COLORS.get(fmap.method, "#1f77b4")
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(f.width)}" '
           f'height="{_n(f.height + 30)}" viewBox="0 0 {_n(f.width)} {_n(f.height + 30)}">',
           '<rect width="100%" height="100%" fill="white"/>']
    if title:
        out.append(f'<title>{title}</title>')
    out.append('<g class="points" fill="#555">')
    for xi, yi in zip(x, y):
        px, py = f.px(xi, yi)
        out.append(f'<circle cx="{px}" cy="{py}" r="1.5"/>')
    out.append('</g>')
    out.append(f'<g class="lines" stroke="{color}" stroke-width="3" stroke-opacity="0.7">')
    for line, k in zip(fmap.lines, fmap.line_spans):
        idx = fmap.spans[k].indices(len(scan))
        (ax, ay), (bx, by) = _line_segment(line, x[idx], y[idx])
        p, q = f.px(ax, ay), f.px(bx, by)
        out.append(f'<line x1="{p[0]}" y1="{p[1]}" x2="{q[0]}" y2="{q[1]}"/>')
    out.append('</g>')
    out.append('<g class="ellipses" fill="none" stroke="#ff7f0e" stroke-width="1">')
    for c in fmap.corners:
        a, b, phi = covariance_ellipse(c.cov)
        cx, cy = f.px(c.x, c.y)
        out.append(f'<ellipse class="ellipse" cx="{cx}" cy="{cy}" rx="{_n(a * f.scale)}" '
                   f'ry="{_n(b * f.scale)}" transform="rotate({_n(-math.degrees(phi))} {cx} {cy})"/>')
    out.append('</g>')
    out.append('<g class="corners" fill="black">')
    for c in fmap.corners:
        cx, cy = (float(v) for v in f.px(c.x, c.y))
        pts = " ".join(f"{_n(px)},{_n(py)}" for px, py in
                       ((cx, cy - 6), (cx - 5.2, cy + 3), (cx + 5.2, cy + 3)))
        out.append(f'<polygon class="corner" points="{pts}"/>')
    out.append('</g>')
    ox, oy = (float(v) for v in f.px(0.0, 0.0))
    out.append(f'<g class="sensor" stroke="red" stroke-width="2">'
               f'<line x1="{_n(ox - 7)}" y1="{_n(oy - 7)}" x2="{_n(ox + 7)}" y2="{_n(oy + 7)}"/>'
               f'<line x1="{_n(ox - 7)}" y1="{_n(oy + 7)}" x2="{_n(ox + 7)}" y2="{_n(oy - 7)}"/></g>')
    out.append(f'<text class="legend" x="10" y="{_n(f.height + 20)}" font-family="sans-serif" '
               f'font-size="12">method {fmap.method}: dots = scan points, strokes = fitted lines, '
               f'triangles = corners, ellipses = {ELLIPSE_SIGMAS:g}-sigma (Mahalanobis) corner '
               f'covariance, red cross = sensor</text>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def bench_svg(rows: Sequence, width: float = 720.0, height: float = 420.0) -> str:
    """Corner sigma (mm, left axis) and time ratio to WCLM (right axis) versus points."""
    ml, mr, mt, mb = 60.0, 60.0, 30.0, 50.0
    n = np.array([r.n_points for r in rows], dtype=float)
    sig = {m: np.array([r.sigma_mm[m] for r in rows]) for m in METHODS}
    ratios = {m: np.array([r.t_us[m] / r.t_us["wclm"] for r in rows]) for m in ("arras", "siadat")}
    smax = max(float(np.max(s)) for s in sig.values()) * 1.1 or 1.0
    rmax = max(1.0, max(float(np.max(v)) for v in ratios.values())) * 1.1
    nmin, nmax = float(n.min()), float(n.max())
    nspan = nmax - nmin or 1.0
    pw, ph = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - nmin) / nspan * pw if nspan else ml + pw / 2

    def YL(v):
        return mt + ph - v / smax * ph

    def YR(v):
        return mt + ph - v / rmax * ph

    def poly(xs, ys, color, dash, cls):
        pts = " ".join(f"{_n(a)},{_n(b)}" for a, b in zip(xs, ys))
        d = ' stroke-dasharray="6,3"' if dash else ""
        return f'<polyline class="{cls}" fill="none" stroke="{color}" stroke-width="1.5"{d} points="{pts}"/>'

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(width)}" height="{_n(height)}" '
           f'viewBox="0 0 {_n(width)} {_n(height)}" font-family="sans-serif" font-size="11">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<rect x="{_n(ml)}" y="{_n(mt)}" width="{_n(pw)}" height="{_n(ph)}" fill="none" stroke="black"/>']
    for k in range(5):
        v = smax * k / 4
        out.append(f'<text x="{_n(ml - 5)}" y="{_n(YL(v) + 4)}" text-anchor="end">{v:.1f}</text>')
        r = rmax * k / 4
        out.append(f'<text x="{_n(width - mr + 5)}" y="{_n(YR(r) + 4)}">{r:.1f}</text>')
    for v in n:
        out.append(f'<text x="{_n(X(v))}" y="{_n(mt + ph + 15)}" text-anchor="middle">{int(v)}</text>')
    out.append(f'<text x="{_n(ml + pw / 2)}" y="{_n(height - 10)}" text-anchor="middle">points per line</text>')
    out.append(f'<text x="15" y="{_n(mt + ph / 2)}" transform="rotate(-90 15 {_n(mt + ph / 2)})" '
               f'text-anchor="middle">corner sigma (mm)</text>')
    out.append(f'<text x="{_n(width - 12)}" y="{_n(mt + ph / 2)}" transform="rotate(90 {_n(width - 12)} '
               f'{_n(mt + ph / 2)})" text-anchor="middle">time ratio to wclm</text>')
    xs = [X(v) for v in n]
    for m in METHODS:
        out.append(poly(xs, [YL(v) for v in sig[m][:, 0]], _COLORS[m], False, f"sigma-x {m}"))
        out.append(poly(xs, [YL(v) for v in sig[m][:, 1]], _COLORS[m], False, f"sigma-y {m}"))
    for m, v in ratios.items():
        out.append(poly(xs, [YR(r) for r in v], _COLORS[m], True, f"ratio {m}"))
    ly = mt + 12
    for m in METHODS:
        out.append(f'<text x="{_n(ml + 8)}" y="{_n(ly)}" fill="{_COLORS[m]}">{m}: sigma_x, sigma_y (solid)'
                   + (" / t/t_wclm (dashed)" if m != "wclm" else "") + '</text>')
        ly += 14
    out.append('</svg>')
    return "\n".join(out) + "\n"
