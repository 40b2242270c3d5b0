"""Polygonal ground-truth worlds and a seeded ray caster producing synthetic scans.

Noise draws use numpy's PCG64 bit generator seeded with the caller's integer
seed.  Range and bearing noise for ray ``k`` are the ``k``-th entries of two
arrays drawn up front (ranges first, then bearings), so the result does not
depend on which rays hit anything.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometryError, ScanFormatError, ValidationError
from .scan import NoiseModel, PolarScan, normalize_angle, TWO_PI

DENOM_GUARD = 1e-12
ENDPOINT_TOL = 1e-9
FIXTURES = ("square", "env_a_like", "env_b_like")


@dataclass(frozen=True)
class WorldModel:
    """Wall segments ``(x1, y1, x2, y2)`` in meters, world frame."""

    segments: np.ndarray
    name: str = "world"

    def __post_init__(self):
        seg = np.array(self.segments, dtype=float).reshape(-1, 4)
        if seg.shape[0] == 0:
            raise ValidationError("a world needs at least one segment")
        if not np.all(np.isfinite(seg)):
            raise ValidationError("segment coordinates must be finite")
        length = np.hypot(seg[:, 2] - seg[:, 0], seg[:, 3] - seg[:, 1])
        short = np.flatnonzero(length <= 1e-9)
        if short.size:
            raise ValidationError(f"segment {int(short[0])} has zero length")
        seg.setflags(write=False)
        object.__setattr__(self, "segments", seg)

    @classmethod
    def from_polygon(cls, vertices, name: str = "world", closed: bool = True) -> "WorldModel":
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        seg = np.hstack([v, np.roll(v, -1, axis=0)])
        if not closed:
            seg = seg[:-1]
        return cls(seg, name)

    def __len__(self) -> int:
        return int(self.segments.shape[0])


@dataclass(frozen=True, slots=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(self.heading))


@dataclass(frozen=True)
class RayBatch:
    """Per-ray simulation record; ``true_range`` is ``nan`` for misses."""

    nominal_bearing: np.ndarray
    true_range: np.ndarray
    range: np.ndarray
    bearing: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return np.isfinite(self.true_range)


# --- world files --------------------------------------------------------------

def parse_world(text: str, name: str = "world", path: str | None = None) -> WorldModel:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ScanFormatError(f"expected 'x1 y1 x2 y2', got {raw!r}", lineno, path)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ScanFormatError(f"non-numeric field in {raw!r}", lineno, path) from None
    if not rows:
        raise ScanFormatError("world file contains no segments", None, path)
    return WorldModel(np.array(rows), name)


def load_world(path_or_name: str | os.PathLike) -> WorldModel:
    """Load a world file, or a shipped fixture by bare name (``"square"``...)."""
    p = Path(path_or_name)
    if not p.exists() and str(path_or_name) in FIXTURES:
        res = resources.files("csf") / "worlds" / f"{path_or_name}.txt"
        return parse_world(res.read_text(encoding="utf-8"), str(path_or_name), str(res))
    with open(p, encoding="utf-8") as fh:
        return parse_world(fh.read(), p.stem, str(p))


def format_world(world: WorldModel) -> str:
    lines = [f"# {world.name}: x1 y1 x2 y2 (m)"]
    for s in world.segments:
        lines.append(" ".join(repr(float(v)) for v in s))
    return "\n".join(lines) + "\n"


# --- ray casting --------------------------------------------------------------

def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def true_ranges(world: WorldModel, pose: Pose, bearings: np.ndarray) -> np.ndarray:
    """Distance to the nearest wall along each sensor-frame bearing (``nan`` on a miss)."""
    seg = world.segments
    ax, ay = seg[:, 0] - pose.x, seg[:, 1] - pose.y
    ex, ey = seg[:, 2] - seg[:, 0], seg[:, 3] - seg[:, 1]
    _check_clearance(ax, ay, ex, ey)
    phi = np.asarray(bearings, dtype=float)[:, None] + pose.heading
    dx, dy = np.cos(phi), np.sin(phi)
    denom = _cross(dx, dy, ex, ey)
    ok = np.abs(denom) > DENOM_GUARD
    safe = np.where(ok, denom, 1.0)
    t = _cross(ax, ay, ex, ey) / safe
    s = _cross(ax, ay, dx, dy) / safe
    # grazing hits at segment endpoints count
    hit = ok & (t > 0.0) & (s >= -1e-12) & (s <= 1.0 + 1e-12)
    t = np.where(hit, t, np.inf)
    best = t.min(axis=1)
    return np.where(np.isfinite(best), best, np.nan)


def _check_clearance(ax, ay, ex, ey):
    # distance from the pose (origin of the shifted frame) to each segment
    L2 = ex * ex + ey * ey
    u = np.clip(-(ax * ex + ay * ey) / L2, 0.0, 1.0)
    d = np.hypot(ax + u * ex, ay + u * ey)
    if np.any(d <= ENDPOINT_TOL):
        i = int(np.argmin(d))
        raise DegenerateGeometryError(f"pose coincides with wall segment {i}")


def ray_bearings(n_rays: int) -> np.ndarray:
    """``n_rays`` uniformly spaced bearings over ``[-pi, pi)``."""
    return -math.pi + TWO_PI * np.arange(n_rays) / n_rays


def _noise_pair(noise) -> tuple[float, float]:
    if noise is None:
        return 0.0, 0.0
    if isinstance(noise, NoiseModel):
        return noise.sigma_rho, noise.sigma_theta
    sr, st = (float(v) for v in noise)
    if sr < 0 or st < 0 or not (math.isfinite(sr) and math.isfinite(st)):
        raise ValidationError("noise standard deviations must be finite and >= 0")
    return sr, st


def simulate_rays(world: WorldModel, pose: Pose, n_rays: int, noise=None,
                  seed: int = 0) -> RayBatch:
    if n_rays < 1:
        raise ValidationError("n_rays must be >= 1")
    sr, st = _noise_pair(noise)
    rng = np.random.Generator(np.random.PCG64(seed))
    e_rho = rng.standard_normal(n_rays) * sr
    e_theta = rng.standard_normal(n_rays) * st
    nominal = ray_bearings(n_rays)
    rt = true_ranges(world, pose, nominal)
    return RayBatch(nominal, rt, rt + e_rho, normalize_angle(nominal + e_theta))


def cast_scan(world: WorldModel, pose: Pose, n_rays: int, noise=None, seed: int = 0,
              *, sensor: NoiseModel | None = None) -> PolarScan:
    """Simulate one sweep.

    ``noise`` is the noise actually applied: a :class:`NoiseModel`, a
    ``(sigma_rho, sigma_theta)`` pair (zeros allowed) or ``None`` for exact
    ranges.  ``sensor`` is the noise model recorded in the scan for downstream
    covariance propagation; it defaults to ``noise`` when that is a
    ``NoiseModel`` and to the nominal sensor model otherwise.

    Rays that hit nothing are omitted.  Points are sorted by their (noisy)
    bearing; noisy samples with non-positive range are dropped.
    """
    rays = simulate_rays(world, pose, n_rays, noise, seed)
    keep = rays.hit & (rays.range > 0.0)
    rho, theta = rays.range[keep], rays.bearing[keep]
    order = np.argsort(theta, kind="stable")
    rho, theta = rho[order], theta[order]
    # noisy bearings can collide; the scan format forbids ties
    dup = np.flatnonzero(np.diff(theta) <= 0.0) + 1
    if dup.size:
        rho, theta = np.delete(rho, dup), np.delete(theta, dup)
    if sensor is None:
        sensor = noise if isinstance(noise, NoiseModel) else NoiseModel()
    sr, st = _noise_pair(noise)
    meta = {
        "source": "synthetic",
        "world": world.name,
        "pose": f"{pose.x!r},{pose.y!r},{pose.heading!r}",
        "rays": str(n_rays),
        "seed": str(seed),
        "applied_sigma_rho_m": repr(sr),
        "applied_sigma_theta_rad": repr(st),
    }
    return PolarScan(rho, theta, sensor, meta)


def ground_truth_corners(world: WorldModel) -> list[tuple[float, float]]:
    """Shared endpoints of consecutive wall segments (including last-to-first)."""
    seg = world.segments
    n = len(seg)
    out = []
    pairs = [(i, i + 1) for i in range(n - 1)]
    if n > 2:
        pairs.append((n - 1, 0))
    for i, j in pairs:
        if math.hypot(seg[i, 2] - seg[j, 0], seg[i, 3] - seg[j, 1]) <= ENDPOINT_TOL:
            out.append((float(seg[j, 0]), float(seg[j, 1])))
    return out


def to_sensor_frame(points, pose: Pose) -> np.ndarray:
    """World-frame points expressed in the sensor frame of ``pose``."""
    p = np.asarray(points, dtype=float).reshape(-1, 2) - (pose.x, pose.y)
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return np.column_stack([c * p[:, 0] + s * p[:, 1], -s * p[:, 0] + c * p[:, 1]])
