"""
一维 Sturm-Liouville 模块

把 ρ 光滑化为 σ，再求 -(σu')' = λσu 在 [0, R] 上 Neumann 边界的第一个正特征值，
作为凸凹圆柱谱隙的连续对照。
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger
from scipy.linalg import eigh_tridiagonal

from config import settings
from density import PiecewiseLinearFn, StepFunction, bad_critical_values
from errors import GraphError, NoConvergenceError, ProfileError

# 末端各留一个单位取 σ = 1，另需一个单位做过渡
MIN_LENGTH = 4.0


@dataclass(frozen=True, eq=False)
class SigmaProfile:
    """h 网格上的正值剖面 σ(t_i)，t_i = i·h，i = 0..N"""

    h: float
    samples: np.ndarray
    R: float
    c_band: float = 1.0
    c_curv: float = 0.0

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.R, len(self.samples))

    @property
    def midpoints(self) -> np.ndarray:
        """单元中点处的 σ（相邻样本平均）"""
        return 0.5 * (self.samples[:-1] + self.samples[1:])

    @classmethod
    def constant(cls, R: float, h: float, value: float = 1.0) -> "SigmaProfile":
        h, count = _grid(R, h)
        return cls(h=h, samples=np.full(count, float(value)), R=float(R), c_band=1.0, c_curv=0.0)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.grid, "sigma": self.samples})


def _grid(R: float, h: float):
    if R <= 0:
        raise ProfileError(f"区间长度必须为正: {R}")
    if h <= 0:
        raise ProfileError(f"网格步长必须为正: {h}")
    cells = max(2, int(math.ceil(R / h - 1e-9)))
    return R / cells, cells + 1


def _second_antiderivative(rho: StepFunction, x: np.ndarray) -> np.ndarray:
    """M2'' = ρ，M2(0) = M2'(0) = 0；ρ 在 [0, R] 外为 0"""
    b = np.asarray(rho.breakpoints2, dtype=np.float64) / 2
    c = np.asarray(rho.values, dtype=np.float64)
    widths = np.diff(b)
    M = np.concatenate([[0.0], np.cumsum(c * widths)])
    M2 = np.concatenate([[0.0], np.cumsum(M[:-1] * widths + c * widths ** 2 / 2)])

    x = np.asarray(x, dtype=np.float64)
    idx = np.clip(np.searchsorted(b, x, side="right") - 1, 0, len(c) - 1)
    d = x - b[idx]
    inside = M2[idx] + M[idx] * d + c[idx] * d * d / 2
    beyond = M2[-1] + M[-1] * (x - b[-1])
    return np.where(x <= b[0], 0.0, np.where(x >= b[-1], beyond, inside))


def mollify(rho: StepFunction, t: np.ndarray, width: Optional[float] = None) -> np.ndarray:
    """与总宽度为 width 的三角核卷积（两个宽 width/2 的方盒核之卷积），精确求值"""
    a = (settings.MOLLIFIER_WIDTH if width is None else width) / 2
    t = np.asarray(t, dtype=np.float64)
    return (
        _second_antiderivative(rho, t + a)
        - 2.0 * _second_antiderivative(rho, t)
        + _second_antiderivative(rho, t - a)
    ) / (a * a)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _band(samples: np.ndarray, rho: StepFunction, R: float) -> float:
    mids = 0.5 * (samples[:-1] + samples[1:])
    t_mid = np.linspace(0.0, R, len(samples))
    t_mid = 0.5 * (t_mid[:-1] + t_mid[1:])
    rho_mid = np.asarray([rho.value_at(t) for t in t_mid], dtype=np.float64)
    positive = rho_mid > 0
    ratio = np.maximum(mids[positive] / rho_mid[positive], rho_mid[positive] / mids[positive])
    return float(ratio.max()) if ratio.size else 1.0


def _max_second_difference(values: np.ndarray, h: float) -> float:
    if len(values) < 3:
        return 0.0
    return float(np.abs(np.diff(values, n=2)).max() / (h * h))


def smooth_sigma(rho: StepFunction, h: Optional[float] = None) -> SigmaProfile:
    """三角核光滑化 ρ，并在两端各一个单位内用 C¹ 过渡到 1"""
    h = settings.STURM_STEP if h is None else h
    if h > 0.25:
        raise ProfileError(f"网格步长必须 ≤ 1/4: {h}")
    bad = bad_critical_values(rho)
    if bad:
        raise ProfileError(f"ρ 存在坏临界值: t={bad[0].t}, jump={bad[0].jump}")
    R = rho.support_end
    if R < MIN_LENGTH:
        raise ProfileError(f"R = {R} < {MIN_LENGTH}")

    h, count = _grid(R, h)
    t = np.linspace(0.0, R, count)
    mollified = mollify(rho, t)

    # 三角核半宽 a 内至多一个断点，故 |σ''| ≤ 2·GOOD_JUMP / a²
    a = settings.MOLLIFIER_WIDTH / 2
    curvature_cap = 2 * settings.GOOD_JUMP / (a * a)
    curvature = _max_second_difference(mollified, h)
    if curvature > curvature_cap * (1 + 1e-6) + 1e-6:
        raise ProfileError(f"光滑化后二阶差分 {curvature:.3f} 超过 {curvature_cap:.3f}")

    weight = _smoothstep(t - 1.0) * _smoothstep(R - 1.0 - t)
    samples = 1.0 + weight * (mollified - 1.0)
    if np.any(samples <= 0):
        raise ProfileError("光滑化剖面出现非正值")

    profile = SigmaProfile(
        h=h,
        samples=samples,
        R=R,
        c_band=_band(samples, rho, R),
        c_curv=_max_second_difference(samples, h),
    )
    logger.debug(f"σ 剖面: R={R}, N={count - 1}, C_band={profile.c_band:.4f}, C_curv={profile.c_curv:.3f}")
    return profile


def _tridiagonal(sigma: SigmaProfile):
    """集中质量 m_i = h σ_i（端点减半），刚度用单元中点 σ"""
    h = sigma.h
    s = sigma.samples
    mid = sigma.midpoints
    mass = h * s.copy()
    mass[0] /= 2
    mass[-1] /= 2
    stiffness_diag = np.zeros_like(s)
    stiffness_diag[:-1] += mid / h
    stiffness_diag[1:] += mid / h
    stiffness_off = -mid / h
    return mass, stiffness_diag, stiffness_off


def neumann_lambda1(sigma: SigmaProfile) -> float:
    """对称化 M^{-1/2} K M^{-1/2} 的第二小特征值（第一个为常数对应的 0）"""
    if len(sigma.samples) < 3:
        raise ProfileError("网格点数不足")
    if np.any(sigma.samples <= 0):
        raise ProfileError("σ 必须为正")
    mass, k_diag, k_off = _tridiagonal(sigma)
    root = np.sqrt(mass)
    diag = k_diag / mass
    off = k_off / (root[:-1] * root[1:])
    try:
        values = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 1))
    except np.linalg.LinAlgError as e:
        raise NoConvergenceError(f"三对角特征值求解失败: {e}", float("nan"))
    scale = float(np.abs(diag).max())
    if abs(values[0]) > 1e-8 * scale:
        raise NoConvergenceError(f"平凡特征值 {values[0]:.3e} 未接近 0", float(abs(values[0])))
    return float(values[1])


def discrete_quotient(sigma: SigmaProfile, u) -> float:
    """离散问题的 Rayleigh 商 uᵀKu / uᵀMu；与常数 M-正交时给出 neumann_lambda1 的上界"""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != sigma.samples.shape:
        raise ProfileError(f"向量维数 {u.shape} 与网格 {sigma.samples.shape} 不符")
    mass, _, _ = _tridiagonal(sigma)
    energy = float(np.dot(sigma.midpoints, np.diff(u) ** 2) / sigma.h)
    denominator = float(np.dot(mass, u * u))
    if denominator == 0.0:
        raise GraphError("离散 Rayleigh 商分母为零")
    return energy / denominator


def invariance_threshold_check(sigma: SigmaProfile, lambda1: float) -> bool:
    """λ1 < 4π² / max σ² 时旋转不变约化成立"""
    return lambda1 < 4.0 * math.pi ** 2 / float(sigma.samples.max()) ** 2


def weighted_quotient_bridge(sigma: SigmaProfile, F: PiecewiseLinearFn) -> float:
    """∫F'^2 σ / ∫F^2 σ，σ 在每个网格单元上取中点值，F 在单元上线性"""
    t = sigma.grid
    values = F(t)
    lengths = np.diff(t)
    fs, fe = values[:-1], values[1:]
    weights = sigma.midpoints
    energy = float(np.dot(weights, (fe - fs) ** 2 / lengths))
    mass = float(np.dot(weights, lengths * (fs * fs + fs * fe + fe * fe) / 3.0))
    if mass == 0.0:
        raise GraphError("σ 加权 Rayleigh 商分母为零")
    return energy / mass
