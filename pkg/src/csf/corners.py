"""Corners as intersections of consecutive fitted lines, for all three line models.

Corner covariance is ``J1 C1 J1^T + J2 C2 J2^T``: the two lines are treated as
independent, so the joint covariance is block diagonal.  Each Jacobian block
is computed by the same expression from the point of view of its own line,
which makes the result exactly invariant under swapping the two inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CSFError, ParallelLinesError, ValidationError
from .fit_baselines import (ImplicitLine, PolarLine, fit_arras_with_cov, fit_siadat_with_cov)
from .fit_wclm import InversionPointLine, fit_wclm_with_cov, inversion_line_to_polar
from .fitinput import FitInput
from .scan import PolarScan
from .segmentation import (DEFAULT_MAX_RANGE_M, DEFAULT_MIN_POINTS, DEFAULT_THRESHOLD_M,
                           SegmentSpan, is_closed_sweep, segment_scan)

#: Lines whose normals differ by less than this angle (rad) have no corner.
PARALLEL_TOL = 1e-6
DEFAULT_GATE_M = 0.5
METHODS = ("wclm", "arras", "siadat")


@dataclass(frozen=True, eq=False)
class CornerFeature:
    x: float
    y: float
    cov: np.ndarray | None = None
    sources: tuple[int, int] = (-1, -1)
    method: str = ""

    @property
    def sigma(self) -> tuple[float, float]:
        return math.sqrt(self.cov[0, 0]), math.sqrt(self.cov[1, 1])


def _block_cov(b1: np.ndarray, c1: np.ndarray, b2: np.ndarray, c2: np.ndarray) -> np.ndarray:
    c = b1 @ c1 @ b1.T + b2 @ c2 @ b2.T
    return 0.5 * (c + c.T)


# --- inversion-point lines ---------------------------------------------------

def _wclm_det(l1: InversionPointLine, l2: InversionPointLine) -> float:
    det = l1.yq * l2.xq - l1.xq * l2.yq
    if abs(det) <= PARALLEL_TOL * math.hypot(l1.xq, l1.yq) * math.hypot(l2.xq, l2.yq):
        raise ParallelLinesError("lines are parallel: no corner")
    return det


def corner_wclm(l1: InversionPointLine, l2: InversionPointLine) -> CornerFeature:
    """Intersection of ``xq1 x - yq1 y = 1`` and ``xq2 x - yq2 y = 1``."""
    det = _wclm_det(l1, l2)
    return CornerFeature((l1.yq - l2.yq) / det, (l1.xq - l2.xq) / det, method="wclm")


def _wclm_block(x, y, own: InversionPointLine, other: InversionPointLine, det):
    return np.array([[x * other.yq / det, (1.0 - x * other.xq) / det],
                     [(1.0 + y * other.yq) / det, -y * other.xq / det]])


def corner_wclm_jacobian(l1: InversionPointLine, l2: InversionPointLine) -> np.ndarray:
    """2x4 Jacobian of the corner with respect to ``(xq1, yq1, xq2, yq2)``."""
    det = _wclm_det(l1, l2)
    c = corner_wclm(l1, l2)
    return np.hstack([_wclm_block(c.x, c.y, l1, l2, det), _wclm_block(c.x, c.y, l2, l1, -det)])


def corner_wclm_covariance(c: CornerFeature, l1: InversionPointLine,
                           l2: InversionPointLine) -> np.ndarray:
    det = _wclm_det(l1, l2)
    return _block_cov(_wclm_block(c.x, c.y, l1, l2, det), l1.cov,
                      _wclm_block(c.x, c.y, l2, l1, -det), l2.cov)


# --- (r, alpha) lines --------------------------------------------------------

def _arras_sin(l1: PolarLine, l2: PolarLine) -> float:
    s = math.sin(l2.alpha - l1.alpha)
    if abs(s) <= PARALLEL_TOL:
        raise ParallelLinesError("lines are parallel: no corner")
    return s


def corner_arras(l1: PolarLine, l2: PolarLine) -> CornerFeature:
    s = _arras_sin(l1, l2)
    x = (l1.r * math.sin(l2.alpha) - l2.r * math.sin(l1.alpha)) / s
    y = (l2.r * math.cos(l1.alpha) - l1.r * math.cos(l2.alpha)) / s
    return CornerFeature(x, y, method="arras")


def _arras_block(x, y, own: PolarLine, other: PolarLine):
    s = math.sin(other.alpha - own.alpha)
    cd = math.cos(other.alpha - own.alpha)
    return np.array([
        [math.sin(other.alpha) / s, (-other.r * math.cos(own.alpha) + x * cd) / s],
        [-math.cos(other.alpha) / s, (-other.r * math.sin(own.alpha) + y * cd) / s],
    ])


def corner_arras_jacobian(l1: PolarLine, l2: PolarLine) -> np.ndarray:
    """2x4 Jacobian with respect to ``(r1, alpha1, r2, alpha2)``."""
    c = corner_arras(l1, l2)
    return np.hstack([_arras_block(c.x, c.y, l1, l2), _arras_block(c.x, c.y, l2, l1)])


def corner_arras_covariance(c: CornerFeature, l1: PolarLine, l2: PolarLine) -> np.ndarray:
    _arras_sin(l1, l2)
    return _block_cov(_arras_block(c.x, c.y, l1, l2), l1.cov, _arras_block(c.x, c.y, l2, l1), l2.cov)


# --- (a, b, c) lines ----------------------------------------------------------

def _siadat_det(l1: ImplicitLine, l2: ImplicitLine) -> float:
    d = l1.a * l2.b - l2.a * l1.b
    if abs(d) <= PARALLEL_TOL * math.hypot(l1.a, l1.b) * math.hypot(l2.a, l2.b):
        raise ParallelLinesError("lines are parallel: no corner")
    return d


def corner_siadat(l1: ImplicitLine, l2: ImplicitLine) -> CornerFeature:
    d = _siadat_det(l1, l2)
    x = (l1.b * l2.c - l2.b * l1.c) / d
    y = (l2.a * l1.c - l1.a * l2.c) / d
    return CornerFeature(x, y, method="siadat")


def _siadat_block(x, y, own: ImplicitLine, other: ImplicitLine, d):
    return np.array([[-x * other.b / d, (other.c + x * other.a) / d, -other.b / d],
                     [(-other.c - y * other.b) / d, y * other.a / d, other.a / d]])


def corner_siadat_jacobian(l1: ImplicitLine, l2: ImplicitLine) -> np.ndarray:
    """2x6 Jacobian with respect to ``(a1, b1, c1, a2, b2, c2)``."""
    d = _siadat_det(l1, l2)
    c = corner_siadat(l1, l2)
    return np.hstack([_siadat_block(c.x, c.y, l1, l2, d), _siadat_block(c.x, c.y, l2, l1, -d)])


def corner_siadat_covariance(c: CornerFeature, l1: ImplicitLine, l2: ImplicitLine) -> np.ndarray:
    d = _siadat_det(l1, l2)
    return _block_cov(_siadat_block(c.x, c.y, l1, l2, d), l1.cov,
                      _siadat_block(c.x, c.y, l2, l1, -d), l2.cov)


# --- method table ---------------------------------------------------------------

@dataclass(frozen=True)
class Method:
    name: str
    fit: Callable[[FitInput], object]  # fit + line covariance
    corner: Callable
    corner_cov: Callable

    def corner_with_cov(self, l1, l2) -> CornerFeature:
        c = self.corner(l1, l2)
        return CornerFeature(c.x, c.y, self.corner_cov(c, l1, l2), c.sources, self.name)


METHOD_TABLE = {
    "wclm": Method("wclm", fit_wclm_with_cov, corner_wclm, corner_wclm_covariance),
    "arras": Method("arras", fit_arras_with_cov, corner_arras, corner_arras_covariance),
    "siadat": Method("siadat", fit_siadat_with_cov, corner_siadat, corner_siadat_covariance),
}


def get_method(name: str) -> Method:
    try:
        return METHOD_TABLE[name]
    except KeyError:
        raise ValidationError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}") from None


# --- feature maps -------------------------------------------------------------

@dataclass(frozen=True)
class ExtractConfig:
    threshold_m: float = DEFAULT_THRESHOLD_M
    min_points: int = DEFAULT_MIN_POINTS
    gate_m: float = DEFAULT_GATE_M
    max_range_m: float = DEFAULT_MAX_RANGE_M
    unit_weights: bool = False
    wrap: bool | None = None


@dataclass
class FeatureMap:
    method: str
    lines: list
    corners: list[CornerFeature]
    spans: list[SegmentSpan]
    line_spans: list[int]  # index into spans for each line
    diagnostics: list[str] = field(default_factory=list)
    n_points: int = 0
    scan_digest: str = ""
    config: ExtractConfig = field(default_factory=ExtractConfig)


def span_endpoints(scan: PolarScan, span: SegmentSpan) -> np.ndarray:
    idx = span.indices(len(scan))[[0, -1]]
    r, t = scan.rho[idx], scan.theta[idx]
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def adjacent_pairs(n_spans: int, closed: bool) -> list[tuple[int, int]]:
    pairs = [(k, k + 1) for k in range(n_spans - 1)]
    if closed and n_spans >= 3:
        pairs.append((n_spans - 1, 0))
    return pairs


def extract_feature_map(scan: PolarScan, method: str = "wclm",
                        config: ExtractConfig | None = None) -> FeatureMap:
    cfg = config or ExtractConfig()
    m = get_method(method)
    spans = segment_scan(scan, cfg.threshold_m, cfg.min_points, cfg.max_range_m, cfg.wrap)
    closed = is_closed_sweep(scan) if cfg.wrap is None else cfg.wrap
    fmap = FeatureMap(method, [], [], spans, [], [], len(scan), scan.digest(), cfg)
    line_of_span: dict[int, int] = {}
    for k, span in enumerate(spans):
        try:
            line = m.fit(FitInput.from_scan(scan, span, cfg.unit_weights))
        except CSFError as exc:
            fmap.diagnostics.append(f"span {k} [{span.start_index}..{span.end_index}]: {exc}")
            continue
        line_of_span[k] = len(fmap.lines)
        fmap.lines.append(line)
        fmap.line_spans.append(k)

    for k1, k2 in adjacent_pairs(len(spans), closed):
        if k1 not in line_of_span or k2 not in line_of_span:
            continue
        i1, i2 = line_of_span[k1], line_of_span[k2]
        l1, l2 = fmap.lines[i1], fmap.lines[i2]
        try:
            c = m.corner(l1, l2)
        except ParallelLinesError:
            fmap.diagnostics.append(f"spans {k1},{k2}: parallel lines, no corner")
            continue
        p = np.array([c.x, c.y])
        near1 = np.min(np.hypot(*(span_endpoints(scan, spans[k1]) - p).T))
        near2 = np.min(np.hypot(*(span_endpoints(scan, spans[k2]) - p).T))
        if near1 > cfg.gate_m or near2 > cfg.gate_m:
            fmap.diagnostics.append(
                f"spans {k1},{k2}: intersection {max(near1, near2):.3f} m from span ends, gated")
            continue
        cov = m.corner_cov(c, l1, l2)
        fmap.corners.append(CornerFeature(c.x, c.y, cov, (i1, i2), m.name))
    return fmap


def line_to_polar(line) -> tuple[float, float]:
    """``(r, alpha)`` for any of the three line types."""
    if isinstance(line, InversionPointLine):
        return inversion_line_to_polar(line)
    if isinstance(line, PolarLine):
        return line.r, line.alpha
    if isinstance(line, ImplicitLine):
        return line.to_polar()
    raise TypeError(f"not a line: {type(line).__name__}")
