"""Per-corner comparison of the three methods on one scan (corner-uncertainty tables)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corners import METHODS, CornerFeature, ExtractConfig, FeatureMap, extract_feature_map
from .scan import PolarScan


@dataclass(frozen=True)
class CornerComparison:
    """One corner seen by every method; keyed by its pair of supporting spans."""

    spans: tuple[int, int]
    corners: dict[str, CornerFeature]


@dataclass(frozen=True)
class ComparisonReport:
    rows: list[CornerComparison]
    maps: dict[str, FeatureMap]

    def sigmas_mm(self, method: str) -> np.ndarray:
        """``(k, 2)`` array of ``(sigma_x, sigma_y)`` in millimetres."""
        return np.array([r.corners[method].sigma for r in self.rows]).reshape(-1, 2) * 1000.0

    def mean_sigma_mm(self, method: str) -> tuple[float, float]:
        s = self.sigmas_mm(method)
        if not len(s):
            return math.nan, math.nan
        return float(s[:, 0].mean()), float(s[:, 1].mean())

    def pooled_mean_sigma_mm(self, method: str) -> float:
        """Mean over corners and both axes."""
        s = self.sigmas_mm(method)
        return float(s.mean()) if s.size else math.nan


def _by_span_pair(fmap: FeatureMap) -> dict[tuple[int, int], CornerFeature]:
    return {(fmap.line_spans[c.sources[0]], fmap.line_spans[c.sources[1]]): c for c in fmap.corners}


def compare_methods(scan: PolarScan, config: ExtractConfig | None = None,
                    methods=METHODS) -> ComparisonReport:
    """Run every method; keep the corners found by all of them, in sweep order."""
    maps = {m: extract_feature_map(scan, m, config) for m in methods}
    keyed = {m: _by_span_pair(f) for m, f in maps.items()}
    first = keyed[methods[0]]
    rows = [CornerComparison(k, {m: keyed[m][k] for m in methods})
            for k in first if all(k in keyed[m] for m in methods)]
    return ComparisonReport(rows, maps)


def _mm(v: float) -> str:
    return f"{v:.3f}"


def format_comparison(report: ComparisonReport) -> str:
    """TSV table: corner, per-method x, y (m) and sigma_x, sigma_y (mm); then means."""
    methods = list(report.maps)
    head = ["corner", "spans"]
    for m in methods:
        head += [f"x_{m}_m", f"y_{m}_m", f"sx_{m}_mm", f"sy_{m}_mm"]
    out = ["\t".join(head)]
    for i, row in enumerate(report.rows):
        cells = [str(i), f"{row.spans[0]}-{row.spans[1]}"]
        for m in methods:
            c = row.corners[m]
            sx, sy = c.sigma
            cells += [f"{c.x:.6f}", f"{c.y:.6f}", _mm(sx * 1000.0), _mm(sy * 1000.0)]
        out.append("\t".join(cells))
    cells = ["mean", ""]
    for m in methods:
        mx, my = report.mean_sigma_mm(m)
        cells += ["", "", _mm(mx), _mm(my)]
    out.append("\t".join(cells))
    return "\n".join(out) + "\n"
