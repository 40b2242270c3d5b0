"""Shared strategies and oracles for the test suite (imported by the test modules)."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import strategies as st

from csf.fitinput import FitInput
from csf.scan import NoiseModel, normalize_angle

SENSOR_NOISE = NoiseModel(0.05, 0.0034121)

#: ``(criterion number, passed, detail)`` triples, printed in the terminal summary.
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def record(number: int, ok: bool, detail: str) -> None:
    """Log one acceptance verdict and fail the calling test if it did not pass."""
    ACCEPTANCE_RESULTS.append((number, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def line_samples(r: float, alpha: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar samples of the points ``r n + t d`` on the line with normal bearing ``alpha``."""
    nx, ny = math.cos(alpha), math.sin(alpha)
    x = r * nx - t * ny
    y = r * ny + t * nx
    return np.hypot(x, y), np.arctan2(y, x)


def random_segment(rng: np.random.Generator, n: int, r_range=(0.5, 5.0), half_len=(0.3, 3.0),
                   noise: tuple[float, float] = (0.0, 0.0)):
    """Random wall seen from the origin: ``(r, alpha, rho, theta)``, bearings sorted."""
    r = rng.uniform(*r_range)
    alpha = rng.uniform(-math.pi, math.pi)
    h = rng.uniform(*half_len)
    c = rng.uniform(-0.5, 0.5) * h
    t = np.sort(rng.uniform(c - h, c + h, n))
    t[0], t[-1] = c - h, c + h
    rho, theta = line_samples(r, alpha, np.sort(t))
    rho = rho + noise[0] * rng.standard_normal(n)
    theta = theta + noise[1] * rng.standard_normal(n)
    return r, alpha, rho, theta


@st.composite
def segments(draw, min_points=5, max_points=60):
    """Hypothesis strategy: seed and point count of a random noise-free wall."""
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(min_points, max_points))
    return seed, n


def central_jacobian(fn, rho: np.ndarray, theta: np.ndarray, h: float = 1e-6,
                     wrap: tuple[int, ...] = ()):
    """Central finite differences of ``fn(rho, theta) -> params`` (angles listed in ``wrap``)."""
    p0 = np.asarray(fn(rho, theta), dtype=float)
    j_rho = np.zeros((p0.size, rho.size))
    j_th = np.zeros((p0.size, rho.size))

    def diff(a, b):
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        for k in wrap:
            d[k] = normalize_angle(d[k])
        return d

    for i in range(rho.size):
        rp, rm = rho.copy(), rho.copy()
        rp[i] += h
        rm[i] -= h
        j_rho[:, i] = diff(fn(rp, theta), fn(rm, theta)) / (2 * h)
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        j_th[:, i] = diff(fn(rho, tp), fn(rho, tm)) / (2 * h)
    return j_rho, j_th


def assert_jacobian_close(analytic, numeric, rtol: float, floor: float = 1e-7):
    """Entry-wise relative check with an absolute floor scaled to the Jacobian's size."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = max(float(np.max(np.abs(numeric))), 1e-300)
    err = np.abs(analytic - numeric)
    bound = rtol * np.abs(numeric) + floor * scale
    worst = float(np.max(err - bound))
    assert worst <= 0.0, f"max excess {worst:.3g} (scale {scale:.3g})"


def fit_input(rho, theta, noise=SENSOR_NOISE, unit_weights=False) -> FitInput:
    return FitInput.from_polar(rho, theta, noise, unit_weights)


def monte_carlo_cov(estimate, rho: np.ndarray, theta: np.ndarray, noise: NoiseModel, draws: int,
                    seed: int = 0, wrap: tuple[int, ...] = ()) -> np.ndarray:
    """Sample covariance of ``estimate(rho', theta')`` over re-noised copies of the samples.

    Angle components listed in ``wrap`` are unwrapped around the noise-free estimate.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    ref = np.asarray(estimate(rho, theta), dtype=float)
    out = np.empty((draws, ref.size))
    for k in range(draws):
        r = rho + noise.sigma_rho * rng.standard_normal(rho.size)
        t = theta + noise.sigma_theta * rng.standard_normal(theta.size)
        out[k] = estimate(r, t)
    for j in wrap:
        out[:, j] = ref[j] + normalize_angle(out[:, j] - ref[j])
    return np.cov(out, rowvar=False)


def normalized_cov_error(sample: np.ndarray, predicted: np.ndarray) -> np.ndarray:
    """``|S_ij - C_ij| / sqrt(C_ii C_jj)``: entry errors in units of the predicted scales."""
    d = np.sqrt(np.diag(predicted))
    return np.abs(sample - predicted) / np.outer(d, d)


#: 30 points of a tilted wall seen at 2.2 to 4 m range.
MC_WALL = dict(r=2.2, alpha=0.5, t=np.linspace(-0.9, 3.3, 30))
