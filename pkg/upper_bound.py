"""
上界模块：双帐篷证书与 λ1 ≤ C (log diam / diam)^2 的分支校验
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from density import PiecewiseLinearFn, StepFunction, distance_density, mass_on, weighted_rayleigh
from errors import CertificateError, GraphError, SupportOverlapError
from graph_core import Graph, bfs_distances, diametral_pair, require_connected
from spectral import lambda1, test_pair_bound


@dataclass
class TentChoice:
    """单个根上的区间选择与帐篷函数"""

    root: int
    j: int
    ratio: float
    F: PiecewiseLinearFn
    quotient: float


@dataclass
class Certificate:
    """两个支撑不交的帐篷函数给出的 λ1 上界证书"""

    k: int
    j1: int
    j2: int
    F1: PiecewiseLinearFn
    F2: PiecewiseLinearFn
    bound: float
    achieved_quotients: Tuple[float, float]
    roots: Tuple[int, int] = (0, 0)
    diam: int = 0
    ratios: Tuple[float, float] = (0.0, 0.0)
    ratio_limit: float = 0.0
    vertex_bound: Optional[float] = None

    @property
    def ratio_ok(self) -> bool:
        return max(self.ratios) <= self.ratio_limit

    @property
    def bound_ok(self) -> bool:
        return max(self.achieved_quotients) <= self.bound

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "j": [self.j1, self.j2],
            "roots": list(self.roots),
            "diam": self.diam,
            "F1": self.F1.to_dict(),
            "F2": self.F2.to_dict(),
            "bound": self.bound,
            "achieved_quotients": list(self.achieved_quotients),
            "ratios": list(self.ratios),
            "ratio_limit": self.ratio_limit,
            "ratio_ok": self.ratio_ok,
            "bound_ok": self.bound_ok,
            "vertex_bound": self.vertex_bound,
        }


@dataclass
class Thm1Report:
    """λ1 上界分支校验结果"""

    lambda1: float
    diam: int
    vol: int
    branch: str  # ST | TENT
    bound_value: float
    ratio: float
    c_fit: float
    degree_ok: bool
    certificate: Optional[Dict[str, Any]] = field(default=None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda1": self.lambda1,
            "diam": self.diam,
            "vol": self.vol,
            "branch": self.branch,
            "bound_value": self.bound_value,
            "ratio": self.ratio,
            "c_fit": self.c_fit,
            "degree_ok": self.degree_ok,
            "certificate": self.certificate,
        }


def interval_masses(rho: StepFunction, k: int, length: float) -> List[float]:
    """m[0] = 0（E_0 为空），m[j] = ∫_{E_j} ρ，j = 1..k"""
    return [0.0] + [mass_on(rho, (j - 1) * length, j * length) for j in range(1, k + 1)]


def choose_interval(masses: List[float], k: int) -> Tuple[int, float]:
    """在 j ∈ {1..k-1} 中取 (m[j-1] + m[j+1]) / m[j] 最小者"""
    best_j, best_ratio = 1, math.inf
    for j in range(1, k):
        ratio = (masses[j - 1] + masses[j + 1]) / masses[j]
        if ratio < best_ratio:
            best_j, best_ratio = j, ratio
    return best_j, best_ratio


def tent_function(j: int, length: float) -> PiecewiseLinearFn:
    """E_{j-1} 上从 0 升到 e^k/k，E_j 上取常值，E_{j+1} 上降回 0"""
    if j == 1:
        return PiecewiseLinearFn(nodes=(0.0, length, 2 * length), node_values=(length, length, 0.0))
    return PiecewiseLinearFn(
        nodes=((j - 2) * length, (j - 1) * length, j * length, (j + 1) * length),
        node_values=(0.0, length, length, 0.0),
    )


def _tent_at(g: Graph, root: int, k: int, length: float) -> TentChoice:
    rho = distance_density(g, root)
    masses = interval_masses(rho, k, length)
    j, ratio = choose_interval(masses, k)
    F = tent_function(j, length)
    return TentChoice(root=root, j=j, ratio=ratio, F=F, quotient=weighted_rayleigh(rho, F))


def tent_certificate(g: Graph, V: float, r: float) -> Certificate:
    """在直径两端各构造一个帐篷函数，给出 λ1 ≤ (1 + ln(r+2)) k / e^k"""
    require_connected(g)
    p1, p2, diam = diametral_pair(g)
    if diam < 2:
        raise CertificateError(f"直径过小: {diam}")
    k = int(math.floor(math.log(diam / 2)))
    if k < 2:
        raise CertificateError(f"直径 {diam} 低于阈值 (k = {k} < 2)")
    if g.vol > V * diam ** r:
        raise CertificateError(f"体积假设不成立: vol = {g.vol} > {V} * {diam}^{r}")

    ek = math.exp(k)
    length = ek / k
    limit = 1.0 + math.log(r + 2)
    bound = limit * k / ek

    first = _tent_at(g, p1, k, length)
    second = _tent_at(g, p2, k, length)
    certificate = Certificate(
        k=k,
        j1=first.j,
        j2=second.j,
        F1=first.F,
        F2=second.F,
        bound=bound,
        achieved_quotients=(first.quotient, second.quotient),
        roots=(p1, p2),
        diam=diam,
        ratios=(first.ratio, second.ratio),
        ratio_limit=limit,
    )

    f1 = first.F(bfs_distances(g, p1).astype(np.float64))
    f2 = second.F(bfs_distances(g, p2).astype(np.float64))
    try:
        certificate.vertex_bound = test_pair_bound(g, f1, f2)
    except SupportOverlapError as e:
        logger.warning(f"顶点采样的帐篷支撑相接，跳过顶点上界: {e}")

    if not certificate.ratio_ok:
        logger.warning(f"区间选择比值 {max(certificate.ratios):.4f} 超过 {limit:.4f}（例外图）")
    if not certificate.bound_ok:
        logger.warning(f"帐篷商 {max(certificate.achieved_quotients):.4e} 超过上界 {bound:.4e}")
    logger.debug(f"帐篷证书: diam={diam}, k={k}, j=({first.j}, {second.j}), bound={bound:.4e}")
    return certificate


def verify_thm1(g: Graph, d: int) -> Thm1Report:
    """vol > diam^2 时走 Spielman-Teng 分支，否则构造帐篷证书 (V = 1, r = 2)"""
    require_connected(g)
    _, _, diam = diametral_pair(g)
    if diam < 3:
        raise GraphError(f"要求直径 ≥ 3: {diam}")
    lam = lambda1(g).lambda1
    vol = g.vol
    ratio = lam * (diam / math.log(diam)) ** 2
    degree_ok = g.max_degree <= d

    if vol > diam ** 2:
        c_fit = lam * vol
        report = Thm1Report(
            lambda1=lam, diam=diam, vol=vol, branch="ST", bound_value=c_fit / vol,
            ratio=ratio, c_fit=c_fit, degree_ok=degree_ok,
        )
    else:
        certificate = tent_certificate(g, 1.0, 2.0)
        report = Thm1Report(
            lambda1=lam, diam=diam, vol=vol, branch="TENT", bound_value=certificate.bound,
            ratio=ratio, c_fit=ratio, degree_ok=degree_ok, certificate=certificate.to_dict(),
        )
    logger.info(f"上界校验: branch={report.branch}, diam={diam}, λ1={lam:.4e}, ratio={ratio:.4f}")
    return report
