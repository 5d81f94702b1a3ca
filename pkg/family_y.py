"""
Y_n 图族模块：三正则扩张图采样、细分与 goodify 扰动
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
from loguru import logger

from config import settings, substream
from density import bad_critical_values, distance_density
from errors import ConstructionError, EdgeListParseError, GraphError
from graph_core import (
    Graph,
    bfs_distances,
    diameter,
    from_edge_list,
    incident_edges,
    parse_edge_list,
    subdivide,
    subdivide_edges,
    to_edge_list_text,
)
from spectral import lambda1


@dataclass(frozen=True)
class RootedGraph:
    """带根图 (Y, p) 及其构造来源"""

    graph: Graph
    root: int
    provenance: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)


def _attempt_seed(seed: int, attempt: int) -> int:
    if attempt == 0:
        return seed
    return int(np.random.SeedSequence([seed, attempt]).generate_state(1)[0])


def random_regular(n: int, seed: int) -> Graph:
    """配置模型配对采样简单连通三正则图，拒绝自环、重边与不连通"""
    if n < 4 or n % 2:
        raise GraphError(f"三正则图要求偶数 n ≥ 4: {n}")
    rng = substream(seed, "expander")
    stubs = np.repeat(np.arange(n, dtype=np.int64), 3)
    for attempt in range(settings.REGULAR_RESAMPLE_CAP):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        ordered = np.sort(pairs, axis=1)
        if len(np.unique(ordered, axis=0)) != len(ordered):
            continue
        graph = from_edge_list(ordered.tolist(), vertex_count=n)
        if not graph.connected:
            continue
        logger.debug(f"三正则图 n={n}, seed={seed}: 第 {attempt + 1} 次配对成功")
        return graph
    raise ConstructionError(f"三正则图采样超过 {settings.REGULAR_RESAMPLE_CAP} 次重采样上限 (n={n})")


def certify_expander(g: Graph, eps: float) -> bool:
    """λ1(g) ≥ eps 时认证为扩张图"""
    try:
        return lambda1(g).lambda1 >= eps
    except GraphError:
        return False


def local_jumps(g: Graph, dist: np.ndarray) -> np.ndarray:
    """按边局部规则把 ρ 在顶点所在层的跳跃分摊到顶点：上行边 +1，水平边 +1，下行边 -1"""
    jumps = np.zeros(g.vertex_count, dtype=np.int64)
    for u, v in g.edges:
        du, dv = dist[u], dist[v]
        if du == dv:
            jumps[u] += 1
            jumps[v] += 1
        elif du < dv:
            jumps[u] += 1
            jumps[v] -= 1
        else:
            jumps[u] -= 1
            jumps[v] += 1
    return jumps


def _edges_to_treat(g: Graph, dist: np.ndarray, t2: int, jump: int) -> Tuple[List[int], str]:
    """保留一个见证点，返回其余贡献者需要细分的边"""
    if t2 % 2:
        level = t2 // 2
        folds = [i for i, (u, v) in enumerate(g.edges) if dist[u] == level and dist[v] == level]
        if -2 * len(folds) != jump:
            raise ConstructionError(f"折叠边贡献 {-2 * len(folds)} 与跳跃 {jump} 不一致 (t={t2 / 2})")
        return folds[1:], f"fold:{g.edges[folds[0]]}"

    level = t2 // 2
    jumps = local_jumps(g, dist)
    contributors = [int(v) for v in np.flatnonzero((dist == level) & (jumps != 0))]
    if int(jumps[contributors].sum()) != jump:
        raise ConstructionError(f"顶点贡献 {int(jumps[contributors].sum())} 与跳跃 {jump} 不一致 (t={level})")
    trivalent = [v for v in contributors if g.degree(v) == 3]
    local_max = [v for v in contributors if jumps[v] == -g.degree(v)]
    witness = (trivalent or local_max or contributors)[0]

    incidence = incident_edges(g)
    chosen = set()
    for v in contributors:
        if v != witness:
            chosen.update(incidence[v])
    return sorted(chosen), f"vertex:{witness}"


def goodify(rg: RootedGraph) -> RootedGraph:
    """逐轮处理最小的坏临界值，直到所有临界值的跳跃 ≤ 3"""
    g, p = rg.graph, rg.root
    degrees = g.degrees
    if degrees.max() > 3:
        raise ConstructionError(f"goodify 要求度 ≤ 3，实际最大度 {int(degrees.max())}")
    if np.any(degrees == 1):
        raise ConstructionError("goodify 要求没有一价顶点")

    cap = 4 * g.trivalent_count() + 2
    rounds = 0
    treated = 0
    while True:
        rho = distance_density(g, p)
        bad = bad_critical_values(rho)
        if not bad:
            break
        if rounds >= cap:
            raise ConstructionError(f"goodify 轮数超过上限 {cap}")
        target = bad[0]
        if target.t2 == 0:
            raise ConstructionError(f"根的度 {g.degree(p)} 超过 3")
        dist = bfs_distances(g, p)
        edge_ids, witness = _edges_to_treat(g, dist, target.t2, target.jump)
        updated = subdivide_edges(g, edge_ids)
        new_rho = distance_density(updated, p)
        if not np.array_equal(rho.cells()[: target.t2], new_rho.cells()[: target.t2]):
            raise ConstructionError(f"第 {rounds + 1} 轮改变了 t={target.t} 以下的密度")
        logger.debug(
            f"goodify 第 {rounds + 1} 轮: t={target.t}, jump={target.jump}, 见证 {witness}, 细分 {len(edge_ids)} 条边"
        )
        g = updated
        rounds += 1
        treated += len(edge_ids)

    provenance = dict(rg.provenance)
    provenance["goodify_rounds"] = provenance.get("goodify_rounds", 0) + rounds
    provenance["goodify_edges"] = provenance.get("goodify_edges", 0) + treated
    return RootedGraph(graph=g, root=p, provenance=provenance)


def build_Y(n: int, alpha: int, eps: float, seed: int) -> RootedGraph:
    """认证扩张图 → 细分 m = n^alpha → 以基图顶点 0 为根 → goodify"""
    if n < 4 or n % 2:
        raise GraphError(f"n 必须为不小于 4 的偶数: {n}")
    if alpha < 0:
        raise GraphError(f"alpha 必须非负: {alpha}")

    base = None
    used_attempt = 0
    for attempt in range(settings.EXPANDER_RESAMPLE_CAP):
        candidate = random_regular(n, _attempt_seed(seed, attempt))
        if certify_expander(candidate, eps):
            base, used_attempt = candidate, attempt
            break
        logger.debug(f"扩张图候选未通过认证 (eps={eps})，重新采样")
    if base is None:
        raise ConstructionError(f"扩张图认证失败: {settings.EXPANDER_RESAMPLE_CAP} 次尝试均 λ1 < {eps}")
    base_gap = lambda1(base).lambda1

    m = n ** alpha
    provenance = {
        "base_n": n,
        "alpha": alpha,
        "seed": seed,
        "expander_attempt": used_attempt,
        "base_lambda1": base_gap,
        "base_diam": diameter(base),
        "m": m,
        "goodify_rounds": 0,
        "goodify_edges": 0,
    }
    rooted = goodify(RootedGraph(graph=subdivide(base, m), root=0, provenance=provenance))
    logger.info(
        f"构造 Y_{n}: alpha={alpha}, V={rooted.graph.vertex_count}, vol={rooted.graph.vol}, "
        f"goodify 轮数={rooted.provenance['goodify_rounds']}"
    )
    return rooted


def to_rooted_text(rg: RootedGraph) -> str:
    """边列表加尾行 "root r" """
    return to_edge_list_text(rg.graph) + f"root {rg.root}\n"


def parse_rooted(text: str) -> RootedGraph:
    lines = text.rstrip("\n").splitlines()
    if not lines or not lines[-1].startswith("root "):
        raise EdgeListParseError("缺少 root 尾行", len(lines))
    try:
        root = int(lines[-1].split()[1])
    except (IndexError, ValueError):
        raise EdgeListParseError(f"无法解析根: {lines[-1]!r}", len(lines))
    graph = parse_edge_list("\n".join(lines[:-1]) + "\n")
    if not 0 <= root < graph.vertex_count:
        raise EdgeListParseError(f"根 {root} 超出范围", len(lines))
    return RootedGraph(graph=graph, root=root)
