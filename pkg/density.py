"""
距离密度模块

ρ_{X,p} 是距离函数 δ_p 把边上长度测度推前得到的密度：对每条边 {x, y}，
a = d(p,x) ≤ b = d(p,y)，若 b = a + 1 则在 (a, a+1) 上贡献 1，若 b = a 则在
(a, a+½) 上贡献 2（边在中点折叠）。所有断点位于 ½ℤ，断点以二倍整数存储，
因此密度的全部簿记都是精确整数运算，浮点只出现在商里。
"""
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from config import settings
from errors import GraphError
from graph_core import Graph, bfs_distances


@dataclass(frozen=True)
class StepFunction:
    """整数值分段常数函数；breakpoints2 为二倍断点，相邻区间取值不同"""

    breakpoints2: Tuple[int, ...]
    values: Tuple[int, ...]

    @property
    def support_end2(self) -> int:
        return self.breakpoints2[-1]

    @property
    def support_end(self) -> float:
        """R = diam_p"""
        return self.breakpoints2[-1] / 2

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(b / 2 for b in self.breakpoints2)

    @classmethod
    def from_cells(cls, cells: Sequence[int]) -> "StepFunction":
        """由半单位格 [i/2, (i+1)/2) 上的取值构造并合并相同取值"""
        cells = [int(c) for c in cells]
        if not cells:
            raise GraphError("空的密度函数")
        breakpoints = [0]
        values = [cells[0]]
        for i, c in enumerate(cells[1:], start=1):
            if c != values[-1]:
                breakpoints.append(i)
                values.append(c)
        breakpoints.append(len(cells))
        return cls(breakpoints2=tuple(breakpoints), values=tuple(values))

    def cells(self) -> np.ndarray:
        """半单位格取值数组，长度为 2R"""
        lengths = np.diff(np.asarray(self.breakpoints2, dtype=np.int64))
        return np.repeat(np.asarray(self.values, dtype=np.int64), lengths)

    def value_at(self, t: float) -> int:
        """右连续取值，[0, R) 之外为 0"""
        t2 = 2.0 * t
        if t2 < 0 or t2 >= self.support_end2:
            return 0
        index = int(np.searchsorted(self.breakpoints2, t2, side="right")) - 1
        return self.values[index]

    def integral2(self) -> int:
        """二倍积分（精确整数）"""
        lengths = np.diff(np.asarray(self.breakpoints2, dtype=np.int64))
        return int(np.dot(lengths, np.asarray(self.values, dtype=np.int64)))

    def integral(self) -> int:
        total2 = self.integral2()
        if total2 % 2:
            raise GraphError(f"密度二倍积分为奇数: {total2}")
        return total2 // 2

    def max_value(self) -> int:
        return max(self.values)


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """[0, R] 上的连续分段线性函数，节点之外取端点值"""

    nodes: Tuple[float, ...]
    node_values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.nodes) != len(self.node_values) or not self.nodes:
            raise ValueError("节点与取值长度必须相同且非空")
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise ValueError("节点必须严格递增")

    def __call__(self, t):
        return np.interp(t, self.nodes, self.node_values)

    def is_zero(self) -> bool:
        return not any(self.node_values)

    def to_dict(self) -> Dict[str, List[float]]:
        return {"nodes": [float(x) for x in self.nodes], "values": [float(y) for y in self.node_values]}


@dataclass(frozen=True)
class CriticalValue:
    """ρ 的间断点"""

    t2: int
    jump: int
    good: bool

    @property
    def t(self) -> float:
        return self.t2 / 2


def distance_density(g: Graph, p: int) -> StepFunction:
    """距离密度 ρ_{X,p}（精确整数值）"""
    if g.edge_count == 0:
        raise GraphError("距离密度要求至少一条边")
    dist = bfs_distances(g, p)
    arr = np.asarray(g.edges, dtype=np.int64)
    du = dist[arr[:, 0]]
    dv = dist[arr[:, 1]]
    low = np.minimum(du, dv)
    flat = du == dv
    end2 = np.where(flat, 2 * low + 1, 2 * low + 2)
    support2 = int(end2.max())

    diff = np.zeros(support2 + 1, dtype=np.int64)
    mono_low = low[~flat]
    np.add.at(diff, 2 * mono_low, 1)
    np.add.at(diff, 2 * mono_low + 2, -1)
    flat_low = low[flat]
    np.add.at(diff, 2 * flat_low, 2)
    np.add.at(diff, 2 * flat_low + 1, -2)
    cells = np.cumsum(diff)[:support2]

    rho = StepFunction.from_cells(cells)
    if rho.integral2() != 2 * g.edge_count:
        raise GraphError(f"密度积分 {rho.integral2() / 2} 与边数 {g.edge_count} 不符")
    return rho


def critical_values(rho: StepFunction) -> List[CriticalValue]:
    """ρ 的全部间断点及跳跃；0 与 diam_p 总在其中"""
    padded = (0,) + rho.values + (0,)
    result = []
    for i, t2 in enumerate(rho.breakpoints2):
        jump = padded[i + 1] - padded[i]
        result.append(CriticalValue(t2=t2, jump=jump, good=abs(jump) <= settings.GOOD_JUMP))
    return result


def bad_critical_values(rho: StepFunction) -> List[CriticalValue]:
    return [c for c in critical_values(rho) if not c.good]


def half_unit_variation(rho: StepFunction) -> Tuple[int, bool]:
    """|t - s| < ½ 时 |ρ(t) - ρ(s)| 的最大值及其是否不超过跳跃上限（按半单位格逐格比较）"""
    cells = np.concatenate([[0], rho.cells(), [0]])
    worst = int(np.abs(np.diff(cells)).max())
    return worst, worst <= settings.GOOD_JUMP


def critical_count_bound(g: Graph, p: int) -> Dict[str, int]:
    """临界值个数与 max ρ 对照 4T + 2"""
    rho = distance_density(g, p)
    bound = 4 * g.trivalent_count() + 2
    count = len(critical_values(rho))
    peak = rho.max_value()
    return {"count": count, "max_rho": peak, "bound": bound, "ok": int(count <= bound and peak <= bound)}


def mass_on(rho: StepFunction, a: float, b: float) -> float:
    """∫_a^b ρ(t) dt"""
    if b <= a:
        return 0.0
    starts = np.asarray(rho.breakpoints2[:-1], dtype=np.float64) / 2
    ends = np.asarray(rho.breakpoints2[1:], dtype=np.float64) / 2
    overlap = np.clip(np.minimum(ends, b) - np.maximum(starts, a), 0.0, None)
    return float(np.dot(overlap, np.asarray(rho.values, dtype=np.float64)))


def _piece_integrals(F: PiecewiseLinearFn, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """相邻点之间 F 线性时的 ∫F'^2 与 ∫F^2"""
    values = F(points)
    lengths = np.diff(points)
    fs, fe = values[:-1], values[1:]
    energy = (fe - fs) ** 2 / lengths
    mass = lengths * (fs * fs + fs * fe + fe * fe) / 3.0
    return energy, mass


def _segment_integrals(F: PiecewiseLinearFn, lo: float, hi: float) -> Tuple[float, float]:
    inner = [x for x in F.nodes if lo < x < hi]
    points = np.asarray([lo] + inner + [hi], dtype=np.float64)
    energy, mass = _piece_integrals(F, points)
    return float(energy.sum()), float(mass.sum())


def weighted_rayleigh(rho: StepFunction, F: PiecewiseLinearFn) -> float:
    """∫F'^2 ρ / ∫F^2 ρ，分段多项式精确积分"""
    end = rho.support_end
    points = np.union1d(
        np.asarray(rho.breakpoints2, dtype=np.float64) / 2,
        np.asarray([x for x in F.nodes if 0.0 < x < end], dtype=np.float64),
    )
    energy, mass = _piece_integrals(F, points)
    mids = (points[:-1] + points[1:]) / 2
    index = np.searchsorted(np.asarray(rho.breakpoints2, dtype=np.float64) / 2, mids, side="right") - 1
    weights = np.asarray(rho.values, dtype=np.float64)[index]
    numerator = float(np.dot(weights, energy))
    denominator = float(np.dot(weights, mass))
    if denominator == 0.0:
        raise GraphError("加权 Rayleigh 商分母为零")
    return numerator / denominator


def metric_rayleigh(g: Graph, p: int, F: PiecewiseLinearFn) -> float:
    """R_X(F∘δ_p)：逐边精确积分（单调边与折叠边两种情形）"""
    dist = bfs_distances(g, p)
    groups: Counter = Counter()
    for u, v in g.edges:
        a, b = int(dist[u]), int(dist[v])
        groups[("flat" if a == b else "mono", min(a, b))] += 1

    numerator = 0.0
    denominator = 0.0
    for (kind, a), count in sorted(groups.items()):
        if kind == "mono":
            energy, mass = _segment_integrals(F, float(a), float(a + 1))
            numerator += count * energy
            denominator += count * mass
        else:
            # 折叠边两半各以单位速度覆盖 [a, a+½]
            energy, mass = _segment_integrals(F, float(a), a + 0.5)
            numerator += 2 * count * energy
            denominator += 2 * count * mass
    if denominator == 0.0:
        raise GraphError("度量 Rayleigh 商分母为零")
    return numerator / denominator


def to_rows(rho: StepFunction) -> List[Tuple[float, float, int]]:
    """CSV 行 (t_start, t_end, value)"""
    b = rho.breakpoints
    return [(b[i], b[i + 1], v) for i, v in enumerate(rho.values)]


def to_frame(rho: StepFunction) -> pd.DataFrame:
    return pd.DataFrame(to_rows(rho), columns=["t_start", "t_end", "value"])


def describe(rho: StepFunction) -> Dict[str, object]:
    """日志与报告用摘要"""
    crit = critical_values(rho)
    summary = {
        "diam_p": rho.support_end,
        "integral": rho.integral(),
        "max_rho": rho.max_value(),
        "critical_values": len(crit),
        "bad_critical_values": sum(1 for c in crit if not c.good),
    }
    logger.debug(f"密度摘要: {summary}")
    return summary
