"""Line fitting by the inversion point ``Q`` of the line.

A line not through the sensor origin is represented by ``Q = (xq, yq)``, the
image under ``w = 1/z`` of the foot of the perpendicular from the origin.
Every point of the line satisfies ``xq * x - yq * y = 1``; the fit minimises
``sum w_i (xq x_i - yq y_i - 1)^2``, a 2x2 linear least-squares problem.

The covariance of ``Q`` is propagated from the range/bearing noise of each
sample through the analytic derivative of the normal-equation solution
(implicit-function theorem on the gradient of the objective, including the
dependence of the weights on range).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateGeometryError
from .fitinput import FitInput, propagate_sensor_noise
from .scan import normalize_angle
from .segmentation import SegmentSpan

#: Relative determinant below which the normal matrix counts as singular.
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class InversionPointLine:
    xq: float
    yq: float
    cov: np.ndarray | None = None
    support: SegmentSpan | None = None

    def __post_init__(self):
        if self.xq == 0.0 and self.yq == 0.0:
            raise DegenerateGeometryError("inversion point at the origin")

    def with_cov(self, cov: np.ndarray) -> "InversionPointLine":
        return replace(self, cov=cov)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.xq, self.yq])

    @classmethod
    def from_polar(cls, r: float, alpha: float, **kw) -> "InversionPointLine":
        """Line ``x cos(alpha) + y sin(alpha) = r``: ``Q = conj(P) / |P|^2``."""
        return cls(math.cos(alpha) / r, -math.sin(alpha) / r, **kw)


def _normal_equations(inp: FitInput):
    w, x, y = inp.w, inp.x, inp.y
    wx, wy = w * x, w * y
    a11 = float(wx @ x)
    a12 = -float(wx @ y)
    a22 = float(wy @ y)
    det = a11 * a22 - a12 * a12
    if det <= SINGULAR_RTOL * (a11 * a11 + a22 * a22 + 2.0 * a12 * a12):
        raise DegenerateGeometryError(
            "singular WCLM normal matrix: line through (or near) the origin, or coincident points")
    return a11, a12, a22, det, float(wx.sum()), -float(wy.sum())


def fit_line_wclm(inp: FitInput) -> InversionPointLine:
    a11, a12, a22, det, b1, b2 = _normal_equations(inp)
    xq = (a22 * b1 - a12 * b2) / det
    yq = (a11 * b2 - a12 * b1) / det
    return InversionPointLine(xq, yq, None, inp.support)


def wclm_jacobian(line: InversionPointLine, inp: FitInput) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives of ``(xq, yq)`` with respect to every ``rho_i`` and ``theta_i``.

    Returns ``(J_rho, J_theta)``, each of shape ``(2, n)``.
    """
    a11, a12, a22, det, _, _ = _normal_equations(inp)
    xq, yq = line.xq, line.yq
    x, y, w, dw = inp.x, inp.y, inp.w, inp.dw_drho
    c, s = np.cos(inp.theta), np.sin(inp.theta)
    res = xq * x - yq * y - 1.0
    # d(a_i . Q) for a_i = (x_i, -y_i)
    g_rho = (res + 1.0) / inp.rho
    g_theta = -(y * xq + x * yq)
    wres = w * res
    dwres = dw * res
    # gradient of the normal-equation residual F = sum w a (a.Q - 1)
    f0_rho = wres * c + w * x * g_rho + dwres * x
    f1_rho = -wres * s - w * y * g_rho - dwres * y
    f0_th = -wres * y + w * x * g_theta
    f1_th = -wres * x - w * y * g_theta
    # -A^{-1} with A = [[a11, a12], [a12, a22]]
    i11, i12, i22 = -a22 / det, a12 / det, -a11 / det
    j_rho = np.vstack([i11 * f0_rho + i12 * f1_rho, i12 * f0_rho + i22 * f1_rho])
    j_th = np.vstack([i11 * f0_th + i12 * f1_th, i12 * f0_th + i22 * f1_th])
    return j_rho, j_th


def wclm_line_covariance(line: InversionPointLine, inp: FitInput) -> np.ndarray:
    j_rho, j_th = wclm_jacobian(line, inp)
    return propagate_sensor_noise(j_rho, j_th, inp.noise)


def fit_wclm_with_cov(inp: FitInput) -> InversionPointLine:
    line = fit_line_wclm(inp)
    return line.with_cov(wclm_line_covariance(line, inp))


def inversion_line_to_polar(line: InversionPointLine) -> tuple[float, float]:
    """``(r, alpha)`` of the line ``x cos(alpha) + y sin(alpha) = r``."""
    r = 1.0 / math.hypot(line.xq, line.yq)
    return r, normalize_angle(math.atan2(-line.yq, line.xq))


def wclm_residuals(line: InversionPointLine, x, y) -> np.ndarray:
    """Constraint residuals ``xq x - yq y - 1``."""
    return line.xq * np.asarray(x) - line.yq * np.asarray(y) - 1.0
