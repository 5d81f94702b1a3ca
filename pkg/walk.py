"""
随机游走模块：懒惰简单随机游走的混合时间与混合时间夹逼校验
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sp
from loguru import logger

from config import settings
from errors import GraphError, NoConvergenceError, SizeLimitError, SolverError
from graph_core import Graph, double_sweep_endpoint, require_connected
from spectral import lambda1

POLICIES = ("worst_exact", "heuristic")
# TV 单调性与平稳性的数值容差
_TV_SLACK = 1e-12


@dataclass
class MixingResult:
    """混合时间结果；tv_curve[t] = (t, 各起点 TV 的最大值)"""

    tau: int
    start_policy: str
    tv_curve: List[tuple] = field(default_factory=list)
    starts: tuple = ()
    per_start: Dict[int, List[float]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"tau": self.tau, "start_policy": self.start_policy, "starts": list(self.starts)}


def transition_matrix(g: Graph, laziness: Optional[float] = None) -> sp.csr_matrix:
    """P = ℓI + (1 - ℓ) D⁻¹A（按重数计权），按行随机"""
    laziness = settings.LAZINESS if laziness is None else laziness
    adjacency = g.adjacency_matrix.astype(np.float64)
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    if np.any(degree == 0):
        raise GraphError("存在孤立顶点，随机游走无定义")
    walk = sp.diags(1.0 / degree) @ adjacency
    return (laziness * sp.identity(g.vertex_count, format="csr") + (1.0 - laziness) * walk).tocsr()


def stationary_distribution(g: Graph) -> np.ndarray:
    """π(x) = deg(x) / 2E"""
    degree = g.degrees.astype(np.float64)
    return degree / degree.sum()


def _default_starts(g: Graph) -> List[int]:
    a = double_sweep_endpoint(g, 0)
    b = double_sweep_endpoint(g, a)
    return sorted({0, a, b})


def mixing_time(
    g: Graph,
    policy: str = "worst_exact",
    starts: Optional[Sequence[int]] = None,
    eps: Optional[float] = None,
) -> MixingResult:
    """逐步精确迭代分布 μ_{t+1} = μ_t P，取首个 max TV ≤ eps 的 t"""
    if policy not in POLICIES:
        raise ValueError(f"未知起点策略: {policy}")
    eps = settings.MIXING_EPS if eps is None else eps
    require_connected(g)
    n = g.vertex_count

    if policy == "worst_exact":
        if n > settings.DENSE_LIMIT:
            raise SizeLimitError(f"worst_exact 要求 V ≤ {settings.DENSE_LIMIT}，实际 {n}")
        chosen = list(range(n))
    else:
        chosen = sorted(set(int(s) for s in starts)) if starts else _default_starts(g)
        for s in chosen:
            if not 0 <= s < n:
                raise GraphError(f"起点 {s} 超出范围")

    P = transition_matrix(g)
    pi = stationary_distribution(g)
    if np.abs(P.T @ pi - pi).max() > _TV_SLACK:
        raise SolverError("度分布不是转移矩阵的平稳分布")

    # 每列一个起点的分布；转置后按列推进
    PT = P.T.tocsr()
    mu = np.zeros((n, len(chosen)))
    mu[chosen, np.arange(len(chosen))] = 1.0
    keep_per_start = policy == "heuristic"

    tv = 0.5 * np.abs(mu - pi[:, None]).sum(axis=0)
    curve = [(0, float(tv.max()))]
    per_start = {s: [float(v)] for s, v in zip(chosen, tv)} if keep_per_start else {}
    t = 0
    while tv.max() > eps:
        if t >= settings.WALK_STEP_CAP:
            raise NoConvergenceError(f"{settings.WALK_STEP_CAP} 步内未达到 TV ≤ {eps}", float(tv.max()), t)
        previous = tv
        mu = PT @ mu
        t += 1
        tv = 0.5 * np.abs(mu - pi[:, None]).sum(axis=0)
        if np.any(tv > previous + _TV_SLACK):
            raise SolverError(f"第 {t} 步 TV 距离增大，数值异常")
        curve.append((t, float(tv.max())))
        if keep_per_start:
            for s, v in zip(chosen, tv):
                per_start[s].append(float(v))

    logger.debug(f"混合时间: V={n}, policy={policy}, 起点数={len(chosen)}, τ={t}")
    return MixingResult(tau=t, start_policy=policy, tv_curve=curve, starts=tuple(chosen), per_start=per_start)


def verify_mixing_sandwich(
    g: Graph,
    policy: str = "worst_exact",
    starts: Optional[Sequence[int]] = None,
) -> Dict[str, Any]:
    """1/(Cλ1) ≤ τ ≤ C ln(vol)/λ1 两侧同时成立的最小 C"""
    vol = g.vol
    if vol < 2:
        raise GraphError(f"vol = {vol} < 2，ln(vol) 无意义")
    result = mixing_time(g, policy, starts)
    lam = lambda1(g).lambda1
    tau = result.tau
    log_vol = math.log(vol)
    c_fit = max(1.0 / (lam * tau) if tau else math.inf, tau * lam / log_vol)
    report = {
        "tau": tau,
        "lambda1": lam,
        "lower": 1.0 / lam,
        "upper": log_vol / lam,
        "C_fit": c_fit,
        "policy": result.start_policy,
        "vertex_count": g.vertex_count,
        "vol": vol,
    }
    logger.info(f"混合夹逼: V={g.vertex_count}, τ={tau}, λ1={lam:.4e}, C_fit={c_fit:.4f}")
    return report


def _family_statistic(family_reports: List[Dict[str, Any]], statistic, label: str) -> Dict[str, Any]:
    if len(family_reports) < 3:
        raise ValueError(f"{label} 至少需要 3 个族成员，实际 {len(family_reports)}")
    rows = sorted(family_reports, key=lambda r: r["diam"])
    diams = np.asarray([r["diam"] for r in rows], dtype=np.float64)
    taus = np.asarray([r["tau"] for r in rows], dtype=np.float64)
    if np.any(diams < 2):
        raise GraphError("族成员直径必须 ≥ 2")
    values = statistic(taus, diams)
    slope = float(np.polyfit(np.log(np.log(diams)), np.log(values), 1)[0])
    return {
        "diam": diams.astype(int).tolist(),
        "tau": taus.astype(int).tolist(),
        "statistic": values.tolist(),
        "C_fit": float(values.max()),
        "c_min": float(values.min()),
        "band": float(values.max() / values.min()),
        "growth": float(values[-1] / values[0]),
        "log_log_slope": slope,
    }


def verify_noBC(family_reports: List[Dict[str, Any]]) -> Dict[str, Any]:
    """统计量 τ·ln(diam)/diam² 在族上的带宽与增长趋势"""
    report = _family_statistic(family_reports, lambda tau, d: tau * np.log(d) / d ** 2, "noBC 校验")
    report["bounded"] = report["band"] <= settings.NOBC_BAND
    logger.info(
        f"noBC 统计量: {[round(v, 4) for v in report['statistic']]}, 带宽 {report['band']:.3f}, "
        f"增长 {report['growth']:.3f}"
    )
    return report


def verify_mixing_lower(family_reports: List[Dict[str, Any]]) -> Dict[str, Any]:
    """统计量 τ·(ln diam / diam)² 有正下界时与混合时间下界一致"""
    report = _family_statistic(
        family_reports, lambda tau, d: tau * (np.log(d) / d) ** 2, "混合时间下界校验"
    )
    report["bounded_below"] = report["c_min"] > 0
    return report


def tv_frame(result: MixingResult) -> pd.DataFrame:
    """列 t, tv（各起点最大值），启发式策略附带每个起点一列 tv_<start>"""
    frame = pd.DataFrame(result.tv_curve, columns=["t", "tv"])
    for start, values in sorted(result.per_start.items()):
        frame[f"tv_{start}"] = values
    return frame
