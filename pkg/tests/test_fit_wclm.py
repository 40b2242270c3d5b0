import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import least_squares

from csf.errors import DegenerateGeometryError, ValidationError
from csf.fit_wclm import (InversionPointLine, fit_line_wclm, fit_wclm_with_cov,
                          inversion_line_to_polar, wclm_jacobian, wclm_line_covariance, wclm_residuals)
from csf.fitinput import FitInput
from csf.scan import NoiseModel

from helpers import (SENSOR_NOISE, assert_jacobian_close, central_jacobian, fit_input, line_samples,
                     random_segment, segments)


def polar_of(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return np.hypot(x, y), np.arctan2(y, x)


@pytest.mark.parametrize("pts, q", [
    ([(2, 0), (2, 1), (2, -1)], (0.5, 0.0)),
    ([(0, 3), (1, 3), (-1, 3)], (0.0, -1 / 3)),
    ([(math.sqrt(2) + t, math.sqrt(2) - t) for t in (-1.0, 0.0, 0.5)], (math.sqrt(2) / 4, -math.sqrt(2) / 4)),
])
def test_fit_examples(pts, q):
    x, y = zip(*pts)
    line = fit_line_wclm(fit_input(*polar_of(x, y), unit_weights=True))
    assert (line.xq, line.yq) == pytest.approx(q, abs=1e-12)


@pytest.mark.parametrize("q, polar", [
    ((0.5, 0.0), (2.0, 0.0)),
    ((0.0, -1 / 3), (3.0, math.pi / 2)),
    ((math.sqrt(2) / 4, -math.sqrt(2) / 4), (2.0, math.pi / 4)),
])
def test_inversion_line_to_polar_examples(q, polar):
    assert inversion_line_to_polar(InversionPointLine(*q)) == pytest.approx(polar, abs=1e-12)


@given(st.floats(0.1, 50.0), st.floats(-math.pi, math.pi, exclude_max=True))
def test_polar_round_trip(r, alpha):
    back = inversion_line_to_polar(InversionPointLine.from_polar(r, alpha))
    assert back[0] == pytest.approx(r, rel=1e-12)
    assert math.cos(back[1] - alpha) == pytest.approx(1.0, abs=1e-12)


def test_q_at_origin_rejected():
    with pytest.raises(DegenerateGeometryError):
        InversionPointLine(0.0, 0.0)


@given(segments(min_points=2, max_points=200))
def test_exact_recovery(seg):
    seed, n = seg
    r, alpha, rho, theta = random_segment(np.random.default_rng(seed), n)
    line = fit_line_wclm(fit_input(rho, theta))
    truth = InversionPointLine.from_polar(r, alpha)
    assert (line.xq, line.yq) == pytest.approx((truth.xq, truth.yq), rel=1e-9, abs=1e-12)
    x, y = rho * np.cos(theta), rho * np.sin(theta)
    assert np.max(np.abs(wclm_residuals(line, x, y))) * r < 1e-9


def test_matches_generic_weighted_least_squares():
    rng = np.random.default_rng(11)
    for _ in range(5):
        _, _, rho, theta = random_segment(rng, 50, noise=(0.05, 0.0034))
        inp = fit_input(rho, theta)
        line = fit_line_wclm(inp)
        sw = np.sqrt(inp.w / inp.w.max())
        sol = least_squares(lambda q: sw * (q[0] * inp.x - q[1] * inp.y - 1.0), x0=[0.1, 0.1],
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        assert np.linalg.norm(line.params - sol.x) <= 1e-9 * np.linalg.norm(sol.x)


def test_line_through_origin_is_singular():
    t = np.linspace(0.5, 2.0, 6)
    with pytest.raises(DegenerateGeometryError):
        fit_line_wclm(fit_input(t, np.full(6, 0.3) + 1e-17 * np.arange(6)))


def test_too_few_points():
    with pytest.raises(ValidationError):
        FitInput.from_polar([1.0], [0.0])


@given(segments(min_points=3, max_points=40), st.floats(-math.pi, math.pi))
def test_rotation_equivariance(seg, phi):
    """Rotating the scan by phi rotates Q by -phi (Q is a conjugated point)."""
    seed, n = seg
    _, _, rho, theta = random_segment(np.random.default_rng(seed), n, noise=(0.01, 0.001))
    a = fit_line_wclm(fit_input(rho, theta))
    b = fit_line_wclm(fit_input(rho, theta + phi))
    q = complex(a.xq, a.yq) * complex(math.cos(phi), -math.sin(phi))
    assert (b.xq, b.yq) == pytest.approx((q.real, q.imag), rel=1e-8, abs=1e-10)


@given(segments(min_points=3, max_points=40), st.floats(0.1, 10.0))
def test_scale_equivariance(seg, k):
    seed, n = seg
    _, _, rho, theta = random_segment(np.random.default_rng(seed), n, noise=(0.01, 0.001))
    a = fit_line_wclm(fit_input(rho, theta))
    b = fit_line_wclm(fit_input(k * rho, theta))
    assert (b.xq, b.yq) == pytest.approx((a.xq / k, a.yq / k), rel=1e-8)


@given(segments(min_points=3, max_points=40), st.floats(1e-3, 1e3))
def test_uniform_weight_scaling_is_irrelevant(seg, k):
    seed, n = seg
    _, _, rho, theta = random_segment(np.random.default_rng(seed), n, noise=(0.01, 0.001))
    a = fit_line_wclm(fit_input(rho, theta, NoiseModel(0.05, 0.003)))
    b = fit_line_wclm(fit_input(rho, theta, NoiseModel(0.05 * k, 0.003)))
    assert (b.xq, b.yq) == pytest.approx((a.xq, a.yq), rel=1e-10)


@pytest.mark.parametrize("unit", [False, True])
def test_jacobian_matches_finite_differences(unit):
    rng = np.random.default_rng(3)
    for _ in range(10):
        _, _, rho, theta = random_segment(rng, 20, noise=(0.02, 0.002))
        inp = fit_input(rho, theta, unit_weights=unit)
        line = fit_line_wclm(inp)
        j_rho, j_th = wclm_jacobian(line, inp)
        n_rho, n_th = central_jacobian(lambda r, t: fit_line_wclm(inp.with_polar(r, t)).params, rho, theta)
        assert_jacobian_close(j_rho, n_rho, 1e-5)
        assert_jacobian_close(j_th, n_th, 1e-5)


def test_covariance_symmetric_psd_and_shrinks_with_points():
    covs = []
    for n in (10, 40, 160):
        rho, theta = line_samples(2.5, 0.4, np.linspace(-1.5, 1.5, n))
        c = wclm_line_covariance(fit_line_wclm(fit_input(rho, theta)), fit_input(rho, theta))
        np.testing.assert_array_equal(c, c.T)
        assert np.all(np.linalg.eigvalsh(c) > 0)
        covs.append(np.trace(c))
    assert covs[0] > covs[1] > covs[2]
    # with n -> 4n the variance drops roughly fourfold
    assert covs[0] / covs[1] == pytest.approx(4.0, rel=0.35)


def test_symmetric_points_give_diagonal_covariance():
    rho, theta = line_samples(2.0, 0.0, np.linspace(-1.0, 1.0, 21))
    c = fit_wclm_with_cov(fit_input(rho, theta)).cov
    assert abs(c[0, 1]) < 1e-3 * math.sqrt(c[0, 0] * c[1, 1])


def test_covariance_scales_with_noise():
    rho, theta = line_samples(2.0, 0.7, np.linspace(-1.0, 1.0, 30))
    a = fit_wclm_with_cov(fit_input(rho, theta, NoiseModel(0.05, 0.003))).cov
    b = fit_wclm_with_cov(fit_input(rho, theta, NoiseModel(0.10, 0.006))).cov
    np.testing.assert_allclose(b, 4 * a, rtol=1e-9)
