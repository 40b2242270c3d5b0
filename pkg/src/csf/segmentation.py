"""Line-tracking segmentation of a sweep into straight-wall runs.

A segment is seeded by two consecutive points.  The next point joins if its
distance to the running (unweighted, orthogonal) line fit is within the
threshold and the refitted line still keeps every member within the
threshold; otherwise the segment closes and a new one is seeded from the
rejected point and its successor.

Full 360 degree sweeps are closed sequences: when the first and last runs lie
on the same wall they are merged into one span that wraps past the end of the
scan (``end_index >= n``; indices are taken modulo ``n``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .scan import PolarScan, TWO_PI

DEFAULT_THRESHOLD_M = 0.02
DEFAULT_MIN_POINTS = 5
DEFAULT_MAX_RANGE_M = 40.0


@dataclass(frozen=True, slots=True, order=True)
class SegmentSpan:
    start_index: int
    end_index: int

    @property
    def count(self) -> int:
        return self.end_index - self.start_index + 1

    def indices(self, n: int) -> np.ndarray:
        """Scan indices of the span, in sweep order (wrapping modulo ``n``)."""
        return np.arange(self.start_index, self.end_index + 1) % n

    def wraps(self, n: int) -> bool:
        return self.end_index >= n


def orthogonal_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Unweighted total-least-squares line: ``(mx, my, nx, ny)`` with unit normal."""
    mx, my = x.mean(), y.mean()
    dx, dy = x - mx, y - my
    sxx, syy, sxy = dx @ dx, dy @ dy, dx @ dy
    phi = 0.5 * math.atan2(2.0 * sxy, sxx - syy)  # direction of largest spread
    return mx, my, -math.sin(phi), math.cos(phi)


def _max_residual(x, y) -> float:
    mx, my, nx, ny = orthogonal_fit(x, y)
    return float(np.max(np.abs((x - mx) * nx + (y - my) * ny)))


def is_closed_sweep(scan: PolarScan) -> bool:
    """True when the sweep covers the full circle with no gap at the wrap."""
    n = len(scan)
    if n < 3:
        return False
    step = float(np.median(np.diff(scan.theta)))
    gap = scan.theta[0] + TWO_PI - scan.theta[-1]
    return gap <= 1.5 * step


def _track(x, y, lo, hi, threshold, min_points, spans):
    """Track segments over the contiguous index range ``[lo, hi)``."""
    i = lo
    while i + 1 < hi:
        start, end = i, i + 1
        line = orthogonal_fit(x[start:end + 1], y[start:end + 1])
        j = end + 1
        while j < hi:
            mx, my, nx, ny = line
            if abs((x[j] - mx) * nx + (y[j] - my) * ny) > threshold:
                break
            xs, ys = x[start:j + 1], y[start:j + 1]
            cand = orthogonal_fit(xs, ys)
            cmx, cmy, cnx, cny = cand
            if np.max(np.abs((xs - cmx) * cnx + (ys - cmy) * cny)) > threshold:
                break
            line, end, j = cand, j, j + 1
        if end - start + 1 >= min_points:
            spans.append(SegmentSpan(start, end))
        i = end + 1


def segment_scan(scan: PolarScan, threshold_m: float = DEFAULT_THRESHOLD_M,
                 min_points: int = DEFAULT_MIN_POINTS,
                 max_range_m: float = DEFAULT_MAX_RANGE_M,
                 wrap: bool | None = None) -> list[SegmentSpan]:
    """Split ``scan`` into straight runs.

    ``wrap=None`` bridges the sweep end automatically for closed sweeps
    (see :func:`is_closed_sweep`); ``False`` treats the sweep as open.
    Points beyond ``max_range_m`` are dropped and break any run they fall in.
    """
    if not threshold_m > 0:
        raise ConfigError("threshold_m must be > 0")
    if min_points < 2:
        raise ConfigError("min_points must be >= 2")
    n = len(scan)
    if n < 2:
        return []
    x, y = scan.cartesian()
    valid = scan.rho <= max_range_m

    spans: list[SegmentSpan] = []
    # contiguous runs of in-range points
    edges = np.flatnonzero(np.diff(np.concatenate([[0], valid.astype(np.int8), [0]])))
    for lo, hi in zip(edges[::2], edges[1::2]):
        _track(x, y, int(lo), int(hi), threshold_m, min_points, spans)

    if wrap is None:
        wrap = is_closed_sweep(scan)
    if wrap and len(spans) >= 2:
        first, last = spans[0], spans[-1]
        if first.start_index == 0 and last.end_index == n - 1:
            idx = np.arange(last.start_index, n + first.end_index + 1) % n
            if _max_residual(x[idx], y[idx]) <= threshold_m:
                spans = spans[1:-1] + [SegmentSpan(last.start_index, n + first.end_index)]
    return spans
