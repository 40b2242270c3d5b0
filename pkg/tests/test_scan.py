import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from csf.errors import DegenerateGeometryError, ScanFormatError, ValidationError
from csf.scan import (NoiseModel, PolarPoint, PolarScan, cartesian_covariances, format_scan,
                      invert_point, load_scan, normalize_angle, parse_scan, point_covariance,
                      point_weight, point_weights, point_with_cov, polar_to_cartesian, save_scan)

from helpers import SENSOR_NOISE

finite = st.floats(-1e3, 1e3, allow_nan=False)
ranges = st.floats(0.05, 40.0)
bearings = st.floats(-math.pi, math.pi, exclude_max=True)


def test_default_noise_is_the_sensor_model():
    n = NoiseModel()
    assert n.sigma_rho == 0.05
    assert n.sigma_theta == pytest.approx(0.0034121, rel=1e-4)


@pytest.mark.parametrize("rho, theta, expect", [
    (2.0, 0.0, (2.0, 0.0)),
    (3.0, math.pi / 2, (0.0, 3.0)),
    (2.8284, math.pi / 4, (2.0, 2.0)),
])
def test_polar_to_cartesian_examples(rho, theta, expect):
    assert polar_to_cartesian(PolarPoint(rho, theta)) == pytest.approx(expect, abs=1e-4)


@pytest.mark.parametrize("z, w", [((2, 0), (0.5, 0)), ((0, 3), (0, -1 / 3)), ((1, 1), (0.5, -0.5))])
def test_invert_point_examples(z, w):
    assert invert_point(*z) == pytest.approx(w, abs=1e-15)


def test_invert_origin_is_degenerate():
    with pytest.raises(DegenerateGeometryError):
        invert_point(0.0, 0.0)


@given(finite, finite)
def test_inversion_is_an_involution_and_matches_complex_reciprocal(x, y):
    if math.hypot(x, y) < 1e-6:
        return
    u, v = invert_point(x, y)
    w = 1.0 / complex(x, y)
    assert (u, v) == pytest.approx((w.real, w.imag), rel=1e-12, abs=1e-300)
    assert invert_point(u, v) == pytest.approx((x, y), rel=1e-12, abs=1e-12)
    # moduli are reciprocal
    assert math.hypot(u, v) * math.hypot(x, y) == pytest.approx(1.0, rel=1e-12)


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_normalize_angle_range_and_equivalence(t):
    a = normalize_angle(t)
    assert -math.pi <= a < math.pi
    assert math.cos(a) == pytest.approx(math.cos(t), abs=1e-9)
    assert math.sin(a) == pytest.approx(math.sin(t), abs=1e-9)
    assert float(normalize_angle(np.array([t]))[0]) == pytest.approx(a, abs=1e-9)


def test_normalize_angle_pi_maps_to_minus_pi():
    assert normalize_angle(math.pi) == -math.pi
    assert normalize_angle(np.array([math.pi]))[0] == -math.pi


def test_point_covariance_examples():
    c = point_covariance(PolarPoint(2.0, 0.0), SENSOR_NOISE)
    np.testing.assert_allclose(np.diag(c), [2.5e-3, 4.656e-5], rtol=1e-3)
    assert c[0, 1] == pytest.approx(0.0, abs=1e-20)
    c = point_covariance(PolarPoint(1.0, math.pi / 2), SENSOR_NOISE)
    np.testing.assert_allclose(np.diag(c), [1.164e-5, 2.5e-3], rtol=1e-3)


def test_point_covariance_matches_monte_carlo():
    rng = np.random.default_rng(7)
    rho, theta = 3.0, 0.6
    r = rho + SENSOR_NOISE.sigma_rho * rng.standard_normal(100_000)
    t = theta + SENSOR_NOISE.sigma_theta * rng.standard_normal(100_000)
    sample = np.cov(np.vstack([r * np.cos(t), r * np.sin(t)]))
    c = point_covariance(PolarPoint(rho, theta), SENSOR_NOISE)
    scale = np.sqrt(np.outer(np.diag(c), np.diag(c)))
    assert np.all(np.abs(sample - c) / scale < 0.03)


@given(ranges, bearings)
def test_point_covariance_symmetric_psd_and_det_matches_weight(rho, theta):
    p = PolarPoint(rho, theta)
    c = point_covariance(p, SENSOR_NOISE)
    assert c[0, 1] == c[1, 0]
    assert np.all(np.linalg.eigvalsh(c) >= -1e-18)
    # the weight is the inverse determinant
    assert point_weight(p, SENSOR_NOISE) * np.linalg.det(c) == pytest.approx(1.0, rel=1e-8)


@given(ranges, bearings, bearings)
def test_weight_is_frame_independent(rho, theta, rot):
    """Rotating the frame rotates the covariance but leaves its determinant alone."""
    c = point_covariance(PolarPoint(rho, theta), SENSOR_NOISE)
    c_rot = point_covariance(PolarPoint(rho, theta + rot), SENSOR_NOISE)
    assert np.linalg.det(c_rot) == pytest.approx(np.linalg.det(c), rel=1e-8)


def test_point_weight_examples():
    w1 = point_weight(PolarPoint(1.0, 0.0), SENSOR_NOISE)
    assert w1 == pytest.approx(3.436e7, rel=1e-3)
    assert point_weight(PolarPoint(2.0, 0.0), SENSOR_NOISE) == pytest.approx(w1 / 4, rel=1e-15)
    np.testing.assert_allclose(point_weights(np.array([1.0, 2.0]), SENSOR_NOISE), [w1, w1 / 4], rtol=1e-15)


def test_point_with_cov_correlation():
    p = point_with_cov(PolarPoint(2.0, math.pi / 4), SENSOR_NOISE)
    assert p.x == pytest.approx(math.sqrt(2)) and p.y == pytest.approx(math.sqrt(2))
    assert p.var_x == pytest.approx(p.var_y)
    assert -1 < p.correlation < 1 and p.correlation > 0  # range noise dominates


def test_vectorised_covariances_match_scalar():
    rho = np.array([1.0, 2.5, 7.0])
    theta = np.array([-2.0, 0.3, 3.0])
    batch = cartesian_covariances(rho, theta, SENSOR_NOISE)
    for k in range(3):
        np.testing.assert_allclose(batch[k], point_covariance(PolarPoint(rho[k], theta[k]), SENSOR_NOISE),
                                   rtol=1e-14, atol=0)


@pytest.mark.parametrize("kw", [dict(sigma_rho=0.0), dict(sigma_theta=-1.0), dict(sigma_rho=math.nan)])
def test_noise_model_validation(kw):
    with pytest.raises(ValidationError):
        NoiseModel(**kw)


def test_polar_point_validation():
    with pytest.raises(ValidationError):
        PolarPoint(-1.0, 0.0)
    with pytest.raises(ValidationError):
        PolarPoint(1.0, math.inf)
    assert PolarPoint(1.0, 3 * math.pi / 2).theta == pytest.approx(-math.pi / 2)


def test_empty_scan_is_valid():
    s = PolarScan.from_points([])
    assert len(s) == 0
    assert parse_scan(format_scan(s)).rho.size == 0


def test_scan_rejects_bad_range_naming_index():
    with pytest.raises(ValidationError, match="point 1"):
        PolarScan(np.array([1.0, -1.0]), np.array([0.0, 0.1]))


def test_scan_rejects_unsorted_and_out_of_range_bearings():
    with pytest.raises(ValidationError, match="increasing"):
        PolarScan(np.array([1.0, 1.0]), np.array([0.1, 0.1]))
    with pytest.raises(ValidationError, match="outside"):
        PolarScan(np.array([1.0]), np.array([math.pi]))


def test_scan_arrays_are_read_only():
    s = PolarScan(np.array([1.0, 2.0]), np.array([0.0, 0.1]))
    with pytest.raises(ValueError):
        s.rho[0] = 5.0


def test_save_load_round_trip(tmp_path):
    s = PolarScan(np.array([1.0, 2.0 / 3.0, math.pi]), np.array([-1.0, 0.1, 1.0 / 3.0]),
                  NoiseModel(0.02, 0.001), {"source": "unit test"})
    path = tmp_path / "s.scan"
    save_scan(s, path)
    back = load_scan(path)
    np.testing.assert_array_equal(back.rho, s.rho)
    np.testing.assert_array_equal(back.theta, s.theta)
    assert back.noise == s.noise
    assert back.metadata == s.metadata
    assert back.digest() == s.digest()
    assert format_scan(back) == path.read_text()


def test_parse_errors_carry_line_numbers():
    text = "# csf-scan 1\n0.0\t1.0\n0.1 oops\n"
    with pytest.raises(ScanFormatError, match=":3:") as exc:
        parse_scan(text, path="f.scan")
    assert exc.value.line == 3
    with pytest.raises(ValidationError, match="point 0"):
        parse_scan("0.0\t-1\n")


def test_digest_depends_on_samples_only():
    a = PolarScan(np.array([1.0, 2.0]), np.array([0.0, 0.1]), NoiseModel(), {"a": "1"})
    b = PolarScan(np.array([1.0, 2.0]), np.array([0.0, 0.1]), NoiseModel(0.01, 0.01), {})
    c = PolarScan(np.array([1.0, 2.0 + 1e-15]), np.array([0.0, 0.1]))
    assert a.digest() == b.digest() != c.digest()
