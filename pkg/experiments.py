"""
实验调度模块：有界并发地构造 X_n 图族并运行对照图族上的校验
"""
import asyncio
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from loguru import logger

from config import CORPUS, settings
from cylinder import build_Xn
from errors import CertificateError, GraphError
from graph_core import (
    Graph,
    complete_graph,
    cycle_graph,
    diameter,
    double_sweep_endpoint,
    grid_graph,
    path_graph,
)
from upper_bound import verify_thm1
from walk import verify_mixing_sandwich

_GENERATORS: Dict[str, Callable[[int], Graph]] = {
    "cycle": cycle_graph,
    "path": path_graph,
    "complete": complete_graph,
    "grid": lambda k: grid_graph(k, k),
}


def corpus_graphs(names: Optional[Sequence[str]] = None) -> Dict[str, Graph]:
    """对照图族，键形如 "cycle_32" """
    graphs = {}
    for name in names or list(CORPUS.keys()):
        generator = _GENERATORS[name]
        for size in CORPUS[name]["sizes"]:
            graphs[f"{name}_{size}"] = generator(size)
    return graphs


def heuristic_starts(g: Graph, apexes: Tuple[int, ...] = ()) -> List[int]:
    """两个锥点加一个双扫描直径端点"""
    origin = apexes[0] if apexes else 0
    return sorted(set(apexes) | {double_sweep_endpoint(g, origin)})


def mixing_policy(g: Graph, requested: str) -> str:
    """顶点数超过稠密上限时退回启发式起点"""
    if requested == "worst_exact" and g.vertex_count > settings.DENSE_LIMIT:
        logger.warning(f"V={g.vertex_count} 超过 {settings.DENSE_LIMIT}，改用 heuristic 起点")
        return "heuristic"
    return requested


class FamilyRunner:
    """图族实验执行器"""

    def __init__(self, max_workers: Optional[int] = None):
        self.semaphore = asyncio.Semaphore(max_workers or settings.MAX_WORKERS)

    async def _run(self, func: Callable, *args) -> Any:
        async with self.semaphore:
            return await asyncio.to_thread(func, *args)

    def _summarize(self, labels: List[Any], results: List[Any], start_time: datetime) -> Dict[str, Any]:
        members = {}
        errors = {}
        for label, result in zip(labels, results):
            if isinstance(result, Exception):
                logger.error(f"任务异常 {label}: {result}")
                errors[label] = result
            else:
                members[label] = result
        end_time = datetime.now()
        return {
            "total": len(labels),
            "success_count": len(members),
            "error_count": len(errors),
            "members": members,
            "errors": errors,
            "duration_seconds": (end_time - start_time).total_seconds(),
            "start_time": start_time.isoformat(),
            "end_time": end_time.isoformat(),
        }

    async def build_family(self, n_list: Sequence[int], alpha: int, eps: float, seed: int) -> Dict[str, Any]:
        """并发构造 X_n，成员按 n 排序"""
        logger.info(f"开始构造图族 n={list(n_list)}, alpha={alpha}, seed={seed}")
        start_time = datetime.now()
        labels = sorted(n_list)
        tasks = [self._run(build_Xn, n, alpha, eps, seed) for n in labels]
        results = await asyncio.gather(*tasks, return_exceptions=True)
        summary = self._summarize(labels, results, start_time)
        logger.info(
            f"图族构造完成: 成功 {summary['success_count']}/{summary['total']}, "
            f"耗时 {summary['duration_seconds']:.1f}s"
        )
        return summary

    async def measure_family(
        self, members: Sequence[Tuple[int, Graph, Tuple[int, ...]]], policy: str = "heuristic"
    ) -> Dict[str, Any]:
        """对每个 (n, X_n, 锥点) 计算混合时间与夹逼常数"""
        start_time = datetime.now()
        labels = [n for n, _, _ in members]
        tasks = []
        for _, g, apexes in members:
            chosen = mixing_policy(g, policy)
            starts = heuristic_starts(g, apexes) if chosen == "heuristic" else None
            tasks.append(self._run(verify_mixing_sandwich, g, chosen, starts))
        results = await asyncio.gather(*tasks, return_exceptions=True)
        summary = self._summarize(labels, results, start_time)
        logger.info(f"图族混合时间完成: 成功 {summary['success_count']}/{summary['total']}")
        return summary

    async def run_corpus(self, func: Callable[[Graph], Any], graphs: Dict[str, Graph]) -> Dict[str, Any]:
        """在对照图族上并发执行单图分析"""
        start_time = datetime.now()
        labels = list(graphs.keys())
        tasks = [self._run(func, graphs[name]) for name in labels]
        results = await asyncio.gather(*tasks, return_exceptions=True)
        summary = self._summarize(labels, results, start_time)
        logger.info(f"对照图族完成: 成功 {summary['success_count']}/{summary['total']}")
        return summary


def corpus_mixing(g: Graph, policy: str = "worst_exact") -> Dict[str, Any]:
    """对照图的混合夹逼（worst_exact 规模过大时退回启发式），附带直径"""
    policy = mixing_policy(g, policy)
    starts = heuristic_starts(g) if policy == "heuristic" else None
    report = verify_mixing_sandwich(g, policy, starts)
    report["diam"] = diameter(g)
    return report


def corpus_thm1(g: Graph) -> Dict[str, Any]:
    """对照图的上界分支校验；直径过小或低于帐篷阈值时记为跳过"""
    try:
        return verify_thm1(g, g.max_degree).to_dict()
    except (CertificateError, GraphError) as e:
        logger.debug(f"跳过上界校验 V={g.vertex_count}: {e}")
        return {"skipped": str(e), "vertex_count": g.vertex_count}
