"""JSON serialization of feature maps.

Floats are written with 17 significant digits (``%.17g``) so that a file
round-trips every value bit-for-bit; covariances are nested row-major lists.
A feature file records the digest of the scan it was extracted from, which
lets consumers reject a feature file paired with the wrong scan.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .corners import CornerFeature, ExtractConfig, FeatureMap, line_to_polar
from .errors import ScanFormatError, ValidationError
from .fit_baselines import ImplicitLine, PolarLine
from .fit_wclm import InversionPointLine
from .scan import PolarScan
from .segmentation import SegmentSpan

FEATURES_FORMAT = "csf-features/1"

_PARAM_NAMES = {
    InversionPointLine: ("xq", "yq"),
    PolarLine: ("r", "alpha"),
    ImplicitLine: ("a", "b", "c"),
}
_LINE_TYPES = {"wclm": InversionPointLine, "arras": PolarLine, "siadat": ImplicitLine}


class _Float17(float):
    def __repr__(self) -> str:
        return format(float(self), ".17g")


def _f(v) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise ValidationError(f"cannot serialize non-finite value {v}")
    return _Float17(v)


def _matrix(m) -> list[list[float]]:
    return [[_f(v) for v in row] for row in np.asarray(m)]


def _encode(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-digit floats (``json`` uses ``float.__repr__``)."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        # flat numeric rows stay on one line
        if all(not isinstance(v, (dict, list)) for v in obj) or \
                all(isinstance(v, list) and all(not isinstance(u, (dict, list)) for u in v) for v in obj):
            return "[" + ", ".join(_encode(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return repr(_f(obj))
    return json.dumps(obj)


def feature_map_to_dict(fmap: FeatureMap) -> dict:
    lines = []
    for i, (line, k) in enumerate(zip(fmap.lines, fmap.line_spans)):
        names = _PARAM_NAMES[type(line)]
        span = fmap.spans[k]
        r, alpha = line_to_polar(line)
        rec = {
            "id": i,
            "method": fmap.method,
            "params": {n: _f(v) for n, v in zip(names, line.params)},
            "polar": {"r": _f(r), "alpha": _f(alpha)},
            "cov": _matrix(line.cov),
            "support": [span.start_index, span.end_index],
        }
        if isinstance(line, ImplicitLine):
            rec["eigen_gap"] = _f(line.eigen_gap) if math.isfinite(line.eigen_gap) else None
        lines.append(rec)
    corners = [{"id": i, "x": _f(c.x), "y": _f(c.y), "cov": _matrix(c.cov),
                "lines": list(c.sources), "method": c.method}
               for i, c in enumerate(fmap.corners)]
    cfg = {k: (_f(v) if isinstance(v, float) else v) for k, v in asdict(fmap.config).items()}
    return {
        "format": FEATURES_FORMAT,
        "method": fmap.method,
        "n_points": fmap.n_points,
        "scan_digest": fmap.scan_digest,
        "config": cfg,
        "lines": lines,
        "corners": corners,
        "diagnostics": list(fmap.diagnostics),
    }


def format_feature_map(fmap: FeatureMap) -> str:
    return _encode(feature_map_to_dict(fmap)) + "\n"


def save_feature_map(fmap: FeatureMap, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_feature_map(fmap))


def _require(d: dict, key: str, path):
    try:
        return d[key]
    except (KeyError, TypeError):
        raise ScanFormatError(f"feature file is missing field {key!r}", None, path) from None


def parse_feature_map(text: str, path: str | None = None) -> FeatureMap:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScanFormatError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    if _require(d, "format", path) != FEATURES_FORMAT:
        raise ScanFormatError(f"unsupported feature format {d['format']!r}", None, path)
    method = _require(d, "method", path)
    if method not in _LINE_TYPES:
        raise ScanFormatError(f"unknown method {method!r}", None, path)
    kind = _LINE_TYPES[method]
    try:
        cfg = ExtractConfig(**_require(d, "config", path))
        spans, lines, line_spans = [], [], []
        for rec in _require(d, "lines", path):
            span = SegmentSpan(*(int(v) for v in rec["support"]))
            p = rec["params"]
            args = [float(p[n]) for n in _PARAM_NAMES[kind]]
            cov = np.array(rec["cov"], dtype=float)
            extra = {}
            if kind is ImplicitLine:
                gap = rec.get("eigen_gap")
                extra["eigen_gap"] = math.inf if gap is None else float(gap)
            lines.append(kind(*args, cov=cov, support=span, **extra))
            line_spans.append(len(spans))
            spans.append(span)
        corners = [CornerFeature(float(c["x"]), float(c["y"]), np.array(c["cov"], dtype=float),
                                 tuple(int(v) for v in c["lines"]), str(c.get("method", method)))
                   for c in _require(d, "corners", path)]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScanFormatError(f"malformed feature record: {exc}", None, path) from None
    for c in corners:
        if not all(0 <= i < len(lines) for i in c.sources):
            raise ScanFormatError(f"corner refers to unknown line ids {c.sources}", None, path)
    return FeatureMap(method, lines, corners, spans, line_spans,
                      [str(s) for s in d.get("diagnostics", [])],
                      int(_require(d, "n_points", path)), str(_require(d, "scan_digest", path)), cfg)


def load_feature_map(path: str | os.PathLike) -> FeatureMap:
    with open(path, encoding="utf-8") as fh:
        return parse_feature_map(fh.read(), str(path))


def check_matches_scan(fmap: FeatureMap, scan: PolarScan) -> None:
    """Raise :class:`ValidationError` unless ``fmap`` was extracted from ``scan``."""
    if fmap.n_points != len(scan) or fmap.scan_digest != scan.digest():
        raise ValidationError(
            f"feature map (n_points={fmap.n_points}, digest={fmap.scan_digest}) does not match "
            f"scan (n_points={len(scan)}, digest={scan.digest()})")
