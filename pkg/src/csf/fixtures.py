"""Canonical synthetic scans of the shipped worlds.

Each fixture is a world, a sensor pose, a ray budget and a seed.  The scans
carry the nominal sensor noise model (used for covariance propagation) while
the noise actually applied to the samples is smaller, so that a 20 mm
line-tracking threshold can segment them; see :data:`FIXTURE_NOISE`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .scan import NoiseModel, PolarScan
from .world import Pose, WorldModel, cast_scan, load_world

#: Realised ``(sigma_rho [m], sigma_theta [rad])`` applied to fixture samples.
FIXTURE_NOISE = (0.003, 0.0003)


@dataclass(frozen=True)
class FixtureSpec:
    world: str
    pose: Pose
    rays: int
    seed: int = 0
    #: ``None`` applies :data:`FIXTURE_NOISE`; ``(0, 0)`` gives exact ranges.
    noise: tuple[float, float] | None = None
    #: index of the corner used by the benchmark (its two spans are the longest)
    bench_corner: int = 0


FIXTURE_SPECS = {
    # exact ranges: the pipeline count check expects corners at (+-2, +-2)
    "square": FixtureSpec("square", Pose(0.0, 0.0, 0.0), 360, 0, (0.0, 0.0), 0),
    # 29 walls and 29 corners in a 12 m x 8 m outline
    "env_a_like": FixtureSpec("env_a_like", Pose(0.4, -0.3, 0.0), 884, 0),
    # 8 walls and 8 corners; ~70 points per wall on average
    "env_b_like": FixtureSpec("env_b_like", Pose(-1.2, -0.5, 0.0), 556, 0, None, 7),
}


def fixture_world(name: str) -> WorldModel:
    return load_world(name)


def fixture_scan(name: str, seed: int | None = None, rays: int | None = None,
                 sensor: NoiseModel | None = None) -> PolarScan:
    """The canonical scan of fixture ``name`` (optionally overriding seed / ray count)."""
    try:
        spec = FIXTURE_SPECS[name]
    except KeyError:
        raise ValidationError(
            f"unknown fixture {name!r}; expected one of {', '.join(FIXTURE_SPECS)}") from None
    noise = FIXTURE_NOISE if spec.noise is None else spec.noise
    return cast_scan(fixture_world(name), spec.pose, rays or spec.rays, noise,
                     spec.seed if seed is None else seed, sensor=sensor or NoiseModel())
