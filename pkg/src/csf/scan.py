"""Scan and noise-model types, coordinate conversion, inversion and per-point weights.

Inversion convention
--------------------
Throughout the package the inversion is ``w = 1/z`` (not ``1/conj(z)``): a point
``z = |z| e^{i theta}`` maps to ``w = (1/|z|) e^{-i theta}``, so in real
coordinates ``(x, y) -> (x, -y) / (x^2 + y^2)``.  The line-fitting constraint
``xq * x - yq * y = 1`` and every sign that follows from it rely on this choice.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DegenerateGeometryError, ScanFormatError, ValidationError

TWO_PI = 2.0 * math.pi

#: Nominal RPLiDAR S1 range accuracy (m).
DEFAULT_SIGMA_RHO = 0.05
#: Half the RPLiDAR S1 angular resolution of 0.391 degrees, in radians.
DEFAULT_SIGMA_THETA = math.radians(0.391 / 2.0)


def normalize_angle(theta):
    """Wrap angles to ``[-pi, pi)``; exactly ``+pi`` maps to ``-pi``.

    Accepts scalars or arrays.
    """
    if np.ndim(theta) == 0:
        t = math.fmod(float(theta) + math.pi, TWO_PI)
        if t < 0.0:
            t += TWO_PI
        t -= math.pi
        if t >= math.pi:
            t -= TWO_PI
        return t
    t = np.mod(np.asarray(theta, dtype=float) + math.pi, TWO_PI) - math.pi
    return np.where(t >= math.pi, t - TWO_PI, t)


@dataclass(frozen=True, slots=True)
class PolarPoint:
    rho: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise ValidationError(f"range must be finite and > 0, got {self.rho!r}")
        if not math.isfinite(self.theta):
            raise ValidationError(f"bearing must be finite, got {self.theta!r}")
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True, slots=True)
class NoiseModel:
    """Independent Gaussian range/bearing noise (m, rad)."""

    sigma_rho: float = DEFAULT_SIGMA_RHO
    sigma_theta: float = DEFAULT_SIGMA_THETA

    def __post_init__(self):
        for name in ("sigma_rho", "sigma_theta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name} must be finite and > 0, got {v!r}")


@dataclass(frozen=True, slots=True)
class CartesianPointWithCov:
    x: float
    y: float
    cov: np.ndarray

    @property
    def var_x(self) -> float:
        return float(self.cov[0, 0])

    @property
    def var_y(self) -> float:
        return float(self.cov[1, 1])

    @property
    def cov_xy(self) -> float:
        return float(self.cov[0, 1])

    @property
    def correlation(self) -> float:
        """Correlation coefficient p of the Cartesian noise ellipse."""
        return self.cov_xy / math.sqrt(self.var_x * self.var_y)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PolarScan:
    """An ordered sweep of range/bearing samples.

    Bearings are wrapped to ``[-pi, pi)`` and strictly increasing.
    """

    rho: np.ndarray
    theta: np.ndarray
    noise: NoiseModel = field(default_factory=NoiseModel)
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        rho = _frozen(self.rho).reshape(-1)
        theta = _frozen(self.theta).reshape(-1)
        if rho.shape != theta.shape:
            raise ValidationError("rho and theta must have the same length")
        bad = np.flatnonzero(~np.isfinite(rho) | (rho <= 0.0))
        if bad.size:
            i = int(bad[0])
            raise ValidationError(f"point {i}: range must be finite and > 0, got {rho[i]!r}")
        bad = np.flatnonzero(~np.isfinite(theta) | (theta < -math.pi) | (theta >= math.pi))
        if bad.size:
            i = int(bad[0])
            raise ValidationError(f"point {i}: bearing {theta[i]!r} outside [-pi, pi)")
        bad = np.flatnonzero(np.diff(theta) <= 0.0)
        if bad.size:
            i = int(bad[0]) + 1
            raise ValidationError(f"point {i}: bearings must be strictly increasing")
        object.__setattr__(self, "rho", _frozen(rho))
        object.__setattr__(self, "theta", _frozen(theta))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @classmethod
    def from_points(cls, points: Iterable[PolarPoint], noise: NoiseModel | None = None,
                    metadata: Mapping[str, str] | None = None) -> "PolarScan":
        pts = list(points)
        return cls(np.array([p.rho for p in pts], dtype=float),
                   np.array([p.theta for p in pts], dtype=float),
                   noise or NoiseModel(), metadata or {})

    def __len__(self) -> int:
        return int(self.rho.size)

    @property
    def points(self) -> list[PolarPoint]:
        return [PolarPoint(float(r), float(t)) for r, t in zip(self.rho, self.theta)]

    def cartesian(self) -> tuple[np.ndarray, np.ndarray]:
        return self.rho * np.cos(self.theta), self.rho * np.sin(self.theta)

    def digest(self) -> str:
        """Short content hash, used to tie feature maps to the scan they came from."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.rho, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.theta, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


# --- geometry -----------------------------------------------------------------

def polar_to_cartesian(p: PolarPoint) -> tuple[float, float]:
    return p.rho * math.cos(p.theta), p.rho * math.sin(p.theta)


def invert_point(x: float, y: float) -> tuple[float, float]:
    """Complex inversion ``w = 1/z`` of ``z = x + iy``."""
    d = x * x + y * y
    if d == 0.0:
        raise DegenerateGeometryError("inversion is undefined at the origin")
    return x / d, -y / d


def point_covariance(p: PolarPoint, noise: NoiseModel) -> np.ndarray:
    """Cartesian covariance of a polar measurement, ``J diag(s_rho^2, s_theta^2) J^T``."""
    return cartesian_covariances(np.array([p.rho]), np.array([p.theta]), noise)[0]


def cartesian_covariances(rho: np.ndarray, theta: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Vectorised :func:`point_covariance`; returns shape ``(n, 2, 2)``."""
    vr = noise.sigma_rho ** 2
    vt = noise.sigma_theta ** 2
    c, s = np.cos(theta), np.sin(theta)
    r2vt = rho * rho * vt
    out = np.empty(np.shape(rho) + (2, 2))
    out[..., 0, 0] = vr * c * c + r2vt * s * s
    out[..., 1, 1] = vr * s * s + r2vt * c * c
    out[..., 0, 1] = out[..., 1, 0] = (vr - r2vt) * s * c
    return out


def point_with_cov(p: PolarPoint, noise: NoiseModel) -> CartesianPointWithCov:
    x, y = polar_to_cartesian(p)
    return CartesianPointWithCov(x, y, point_covariance(p, noise))


def point_weight(p: PolarPoint, noise: NoiseModel) -> float:
    """Frame-independent weight ``1 / (s_rho^2 rho^2 s_theta^2)`` in m^-4.

    Equal to the inverse determinant of :func:`point_covariance`.
    """
    return 1.0 / (noise.sigma_rho ** 2 * p.rho ** 2 * noise.sigma_theta ** 2)


def point_weights(rho: np.ndarray, noise: NoiseModel) -> np.ndarray:
    return 1.0 / (noise.sigma_rho ** 2 * noise.sigma_theta ** 2 * (rho * rho))


# --- file I/O -----------------------------------------------------------------

SCAN_MAGIC = "csf-scan 1"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def format_scan(scan: PolarScan) -> str:
    lines = [f"# {SCAN_MAGIC}",
             f"# sigma_rho_m: {_fmt(scan.noise.sigma_rho)}",
             f"# sigma_theta_rad: {_fmt(scan.noise.sigma_theta)}"]
    for k, v in scan.metadata.items():
        k = str(k).strip()
        if k in ("sigma_rho_m", "sigma_theta_rad") or ":" in k or "\n" in str(v):
            raise ValidationError(f"metadata key/value not serialisable: {k!r}")
        lines.append(f"# {k}: {v}")
    lines.append("# columns: theta_rad\trho_m")
    for t, r in zip(scan.theta, scan.rho):
        lines.append(f"{_fmt(t)}\t{_fmt(r)}")
    return "\n".join(lines) + "\n"


def parse_scan(text: str, path: str | None = None) -> PolarScan:
    header: dict[str, str] = {}
    theta: list[float] = []
    rho: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                k, v = body.split(":", 1)
                k, v = k.strip(), v.strip()
                if k in ("columns",) or " " in k:
                    continue
                header[k] = v
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            parts = line.split()
        if len(parts) != 2:
            raise ScanFormatError(f"expected 'theta_rad<TAB>rho_m', got {raw!r}", lineno, path)
        try:
            t, r = float(parts[0]), float(parts[1])
        except ValueError:
            raise ScanFormatError(f"non-numeric field in {raw!r}", lineno, path) from None
        theta.append(t)
        rho.append(r)
    noise_kw = {}
    for key, arg in (("sigma_rho_m", "sigma_rho"), ("sigma_theta_rad", "sigma_theta")):
        if key in header:
            try:
                noise_kw[arg] = float(header.pop(key))
            except ValueError:
                raise ScanFormatError(f"bad value for header key {key}", None, path) from None
    metadata = {k: v for k, v in header.items()}
    return PolarScan(np.array(rho, dtype=float), np.array(theta, dtype=float),
                     NoiseModel(**noise_kw), metadata)


def save_scan(scan: PolarScan, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_scan(scan))


def load_scan(path: str | os.PathLike) -> PolarScan:
    with open(path, encoding="utf-8") as fh:
        return parse_scan(fh.read(), str(path))
