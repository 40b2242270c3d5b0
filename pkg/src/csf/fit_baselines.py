"""Reference line fitters: Arras-Siegwart ``(r, alpha)`` and Siadat ``(a, b, c)``.

Both minimise the weighted orthogonal distance of the samples to the line and
propagate range/bearing noise through analytic first derivatives.

The Arras-Siegwart angle is evaluated from the weighted double sums over all
sample pairs, O(n^2) in time and memory; ``double_sums=False`` selects the
algebraically identical O(n) factorisation of those sums.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import AmbiguousDirectionError, DegenerateGeometryError, UnreliableCovarianceWarning
from .fitinput import FitInput, propagate_sensor_noise
from .scan import normalize_angle
from .segmentation import SegmentSpan

ISOTROPY_RTOL = 1e-12
UNRELIABLE_GAP_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class PolarLine:
    """Line ``x cos(alpha) + y sin(alpha) = r`` with ``r > 0``."""

    r: float
    alpha: float
    cov: np.ndarray | None = None
    support: SegmentSpan | None = None

    def with_cov(self, cov: np.ndarray) -> "PolarLine":
        return replace(self, cov=cov)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.r, self.alpha])


@dataclass(frozen=True, eq=False)
class ImplicitLine:
    """Line ``a x + b y + c = 0`` with ``a^2 + b^2 = 1`` and ``c <= 0``."""

    a: float
    b: float
    c: float
    cov: np.ndarray | None = None
    support: SegmentSpan | None = None
    eigen_gap: float = math.inf

    def with_cov(self, cov: np.ndarray) -> "ImplicitLine":
        return replace(self, cov=cov)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    @property
    def cov_reliable(self) -> bool:
        """False when the scatter eigen-gap is too small for a trustworthy covariance."""
        return self.eigen_gap > UNRELIABLE_GAP_RTOL

    def to_polar(self) -> tuple[float, float]:
        return -self.c, normalize_angle(math.atan2(self.b, self.a))


# --- Arras-Siegwart -------------------------------------------------------------

def _pair_sums(inp: FitInput, double_sums: bool):
    """Weighted sums behind tan(2 alpha).

    Returns ``(N, D, W, u, e_sin, e_cos, s_n, s_d)`` where ``u = w rho``,
    ``e_sin[k] = sum_j u_j sin(theta_k + theta_j)`` and likewise ``e_cos``;
    ``s_n`` and ``s_d`` are the two double sums.
    """
    w, rho, th = inp.w, inp.rho, inp.theta
    c, s = np.cos(th), np.sin(th)
    u = w * rho
    W = float(w.sum())
    wr2 = w * rho * rho
    p_sin = float(wr2 @ np.sin(2.0 * th))
    p_cos = float(wr2 @ np.cos(2.0 * th))
    if double_sums:
        uu = np.outer(u, u)
        s_n = float(np.sum(uu * np.outer(c, s)))
        tsum = th[:, None] + th[None, :]
        m_cos = np.cos(tsum)
        m_sin = np.sin(tsum)
        s_d = float(np.sum(uu * m_cos))
        e_cos = m_cos @ u
        e_sin = m_sin @ u
    else:
        uc, us = float(u @ c), float(u @ s)
        s_n = uc * us
        s_d = uc * uc - us * us
        e_sin = s * uc + c * us
        e_cos = c * uc - s * us
    N = p_sin - 2.0 * s_n / W
    D = p_cos - s_d / W
    return N, D, W, u, e_sin, e_cos, s_n, s_d


def _arras_angle(N: float, D: float, scale: float) -> float:
    if math.hypot(N, D) <= ISOTROPY_RTOL * scale:
        raise DegenerateGeometryError("Arras-Siegwart fit: coincident or isotropic points")
    # the normal minimises the scatter, hence the negated arguments
    return 0.5 * math.atan2(-N, -D)


def fit_line_arras(inp: FitInput, double_sums: bool = True) -> PolarLine:
    N, D, W, u, *_ = _pair_sums(inp, double_sums)
    alpha = _arras_angle(N, D, float(inp.w @ (inp.rho * inp.rho)))
    r = float(u @ np.cos(inp.theta - alpha)) / W
    if r < 0.0:
        r, alpha = -r, alpha + math.pi
    return PolarLine(r, normalize_angle(alpha), None, inp.support)


def arras_jacobian(line: PolarLine, inp: FitInput, double_sums: bool = True):
    """``(J_rho, J_theta)`` of ``(r, alpha)``, each of shape ``(2, n)``."""
    N, D, W, u, e_sin, e_cos, s_n, s_d = _pair_sums(inp, double_sums)
    w, dw, rho, th = inp.w, inp.dw_drho, inp.rho, inp.theta
    du = w + rho * dw
    d_wr2 = dw * rho * rho + 2.0 * w * rho
    two_th = 2.0 * th
    sin2, cos2 = np.sin(two_th), np.cos(two_th)
    wr2 = w * rho * rho

    dN_rho = d_wr2 * sin2 - 2.0 * (du * e_sin / W - s_n * dw / (W * W))
    dN_th = 2.0 * wr2 * cos2 - 2.0 * u * e_cos / W
    dD_rho = d_wr2 * cos2 - (2.0 * du * e_cos / W - s_d * dw / (W * W))
    dD_th = -2.0 * wr2 * sin2 + 2.0 * u * e_sin / W

    k = 0.5 / (N * N + D * D)
    da_rho = k * (D * dN_rho - N * dD_rho)
    da_th = k * (D * dN_th - N * dD_th)

    alpha = line.alpha
    cd, sd = np.cos(th - alpha), np.sin(th - alpha)
    dr_dalpha = float(u @ sd) / W
    dr_rho = du * cd / W - line.r * dw / W + dr_dalpha * da_rho
    dr_th = -u * sd / W + dr_dalpha * da_th
    return np.vstack([dr_rho, da_rho]), np.vstack([dr_th, da_th])


def arras_line_covariance(line: PolarLine, inp: FitInput, double_sums: bool = True) -> np.ndarray:
    j_rho, j_th = arras_jacobian(line, inp, double_sums)
    return propagate_sensor_noise(j_rho, j_th, inp.noise)


def fit_arras_with_cov(inp: FitInput, double_sums: bool = True) -> PolarLine:
    line = fit_line_arras(inp, double_sums)
    return line.with_cov(arras_line_covariance(line, inp, double_sums))


# --- Siadat -----------------------------------------------------------------------

def _scatter(inp: FitInput):
    w, x, y = inp.w, inp.x, inp.y
    W = float(w.sum())
    mx, my = float(w @ x) / W, float(w @ y) / W
    dx, dy = x - mx, y - my
    wdx = w * dx
    sxx, sxy, syy = float(wdx @ dx), float(wdx @ dy), float((w * dy) @ dy)
    lam, vec = np.linalg.eigh(np.array([[sxx, sxy], [sxy, syy]]))
    if lam[1] <= 0.0 or lam[1] - lam[0] <= ISOTROPY_RTOL * abs(lam[1]):
        raise AmbiguousDirectionError("Siadat fit: isotropic scatter, no preferred direction")
    return W, mx, my, dx, dy, lam, vec


def _siadat_sign(a: float, b: float, c: float) -> float:
    if c > 0.0 or (c == 0.0 and (a < 0.0 or (a == 0.0 and b < 0.0))):
        return -1.0
    return 1.0


def fit_line_siadat(inp: FitInput) -> ImplicitLine:
    W, mx, my, dx, dy, lam, vec = _scatter(inp)
    a, b = float(vec[0, 0]), float(vec[1, 0])
    c = -(a * mx + b * my)
    sg = _siadat_sign(a, b, c)
    gap = float((lam[1] - lam[0]) / lam[1])
    return ImplicitLine(sg * a, sg * b, sg * c, None, inp.support, gap)


def siadat_jacobian(line: ImplicitLine, inp: FitInput) -> tuple[np.ndarray, np.ndarray]:
    """``(J_rho, J_theta)`` of ``(a, b, c)``, each of shape ``(3, n)``.

    ``(a, b)`` moves along the other eigenvector by first-order eigenvector
    perturbation; ``c`` follows through the weighted centroid.
    """
    W, mx, my, dx, dy, lam, vec = _scatter(inp)
    w, dw, th = inp.w, inp.dw_drho, inp.theta
    v1 = np.array([line.a, line.b])  # already carries the sign convention
    v2 = vec[:, 1]
    cth, sth = np.cos(th), np.sin(th)
    d_v1 = dx * v1[0] + dy * v1[1]
    d_v2 = dx * v2[0] + dy * v2[1]
    inv_gap = 1.0 / (lam[0] - lam[1])

    def block(ex, ey, dwk):
        e_v1 = ex * v1[0] + ey * v1[1]
        e_v2 = ex * v2[0] + ey * v2[1]
        proj = (w * (e_v2 * d_v1 + d_v2 * e_v1) + dwk * d_v2 * d_v1) * inv_gap
        da, db = proj * v2[0], proj * v2[1]
        dmx = (w * ex + dwk * dx) / W
        dmy = (w * ey + dwk * dy) / W
        dc = -(da * mx + db * my) - (v1[0] * dmx + v1[1] * dmy)
        return np.vstack([da, db, dc])

    j_rho = block(cth, sth, dw)
    j_th = block(-inp.y, inp.x, np.zeros_like(w))
    return j_rho, j_th


def siadat_line_covariance(line: ImplicitLine, inp: FitInput) -> np.ndarray:
    if not line.cov_reliable:
        warnings.warn(f"Siadat covariance unreliable: relative eigen-gap {line.eigen_gap:.3g}",
                      UnreliableCovarianceWarning, stacklevel=2)
    j_rho, j_th = siadat_jacobian(line, inp)
    return propagate_sensor_noise(j_rho, j_th, inp.noise)


def fit_siadat_with_cov(inp: FitInput) -> ImplicitLine:
    line = fit_line_siadat(inp)
    return line.with_cov(siadat_line_covariance(line, inp))
