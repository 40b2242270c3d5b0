"""Weighted point sets handed to the line fitters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .scan import NoiseModel, PolarScan, point_weights
from .segmentation import SegmentSpan


@dataclass(frozen=True, eq=False)
class FitInput:
    """Polar samples of one wall with their Cartesian images and weights.

    ``dw_drho`` is the derivative of each weight with respect to its own range;
    it is zero in unit-weight mode and ``-2 w / rho`` otherwise.
    """

    rho: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    dw_drho: np.ndarray
    noise: NoiseModel
    unit_weights: bool = False
    support: SegmentSpan | None = None

    @classmethod
    def from_polar(cls, rho, theta, noise: NoiseModel | None = None, unit_weights: bool = False,
                   support: SegmentSpan | None = None) -> "FitInput":
        rho = np.ascontiguousarray(rho, dtype=float).reshape(-1)
        theta = np.ascontiguousarray(theta, dtype=float).reshape(-1)
        noise = noise or NoiseModel()
        if rho.shape != theta.shape:
            raise ValidationError("rho and theta must have the same length")
        if rho.size < 2:
            raise ValidationError("a line fit needs at least 2 points")
        if np.any(~np.isfinite(rho) | (rho <= 0)) or np.any(~np.isfinite(theta)):
            raise ValidationError("ranges must be finite and > 0, bearings finite")
        if unit_weights:
            w = np.ones_like(rho)
            dw = np.zeros_like(rho)
        else:
            w = point_weights(rho, noise)
            dw = -2.0 * w / rho
        return cls(rho, theta, rho * np.cos(theta), rho * np.sin(theta), w, dw, noise,
                   unit_weights, support)

    @classmethod
    def from_scan(cls, scan: PolarScan, span: SegmentSpan, unit_weights: bool = False) -> "FitInput":
        idx = span.indices(len(scan))
        return cls.from_polar(scan.rho[idx], scan.theta[idx], scan.noise, unit_weights, span)

    def with_polar(self, rho, theta) -> "FitInput":
        """Same configuration, different samples (used by perturbation oracles)."""
        return FitInput.from_polar(rho, theta, self.noise, self.unit_weights, self.support)

    def __len__(self) -> int:
        return int(self.rho.size)


def propagate_sensor_noise(j_rho: np.ndarray, j_theta: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """``s_rho^2 J_rho J_rho^T + s_theta^2 J_theta J_theta^T`` for ``(k, n)`` Jacobians."""
    c = noise.sigma_rho ** 2 * (j_rho @ j_rho.T) + noise.sigma_theta ** 2 * (j_theta @ j_theta.T)
    return 0.5 * (c + c.T)
