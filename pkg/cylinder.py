"""
凸凹圆柱模块：由宽度剖面堆叠三角化环带，锥化为球面三角剖分 X_n
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from config import settings
from density import StepFunction, distance_density
from errors import ConstructionError, ProfileError
from family_y import RootedGraph, build_Y
from graph_core import (
    Edge,
    Face,
    Graph,
    SphereTriangulation,
    diameter,
    from_edge_list,
    validate_sphere_triangulation,
)
from reports import PipelineReport
from spectral import lambda1
from sturm import invariance_threshold_check, neumann_lambda1, smooth_sigma

# 最短环长
MIN_WIDTH = 3
# 三角剖分度上界
DEGREE_CAP = 12


def max_width_step() -> int:
    """相邻层宽度差上限，随好临界值跳跃上限变化"""
    return 2 * settings.GOOD_JUMP


@dataclass(frozen=True)
class WidthProfile:
    """整数层宽度 w(0..R)"""

    widths: Tuple[int, ...]

    @property
    def R(self) -> int:
        return len(self.widths) - 1

    def violations(self) -> List[str]:
        w = self.widths
        problems = []
        if len(w) < 2:
            problems.append("层数不足")
        if any(x < MIN_WIDTH for x in w):
            problems.append(f"存在宽度 < {MIN_WIDTH}")
        if w and (w[0] != MIN_WIDTH or w[-1] != MIN_WIDTH):
            problems.append("端点宽度必须为 3")
        steps = [abs(b - a) for a, b in zip(w, w[1:])]
        step_cap = max_width_step()
        if steps and max(steps) > step_cap:
            problems.append(f"相邻层宽度差 {max(steps)} > {step_cap}")
        return problems


@dataclass(frozen=True)
class AnnulusGadget:
    """C_a 与 C_b 之间的三角化环带；内环局部编号 0..a-1，外环 a..a+b-1"""

    a: int
    b: int
    cross_edges: Tuple[Edge, ...]
    faces: Tuple[Face, ...]


@dataclass(frozen=True)
class Cylinder:
    """堆叠环带得到的圆柱，记录每个顶点的层号（离散投影）"""

    graph: Graph
    faces: Tuple[Face, ...]
    levels: Tuple[int, ...]
    bottom: Tuple[int, ...]
    top: Tuple[int, ...]


def width_profile(rho: StepFunction) -> WidthProfile:
    """w(t) = max(3, ρ(t + ¼))，两端强制为 3"""
    R = int(math.floor(rho.support_end))
    if R < 2:
        raise ProfileError(f"R = {R} < 2")
    widths = [max(MIN_WIDTH, rho.value_at(t + 0.25)) for t in range(R + 1)]
    widths[0] = widths[-1] = MIN_WIDTH
    profile = WidthProfile(widths=tuple(widths))
    problems = profile.violations()
    if problems:
        raise ProfileError(f"宽度剖面不合法: {problems}")
    return profile


def triangulated_annulus(a: int, b: int) -> AnnulusGadget:
    """按斜率平衡交错的拉链式三角化，a + b 条交叉边与 a + b 个三角形"""
    if min(a, b) < MIN_WIDTH:
        raise ConstructionError(f"环长必须 ≥ {MIN_WIDTH}: ({a}, {b})")
    if max(a, b) > 3 * min(a, b):
        raise ConstructionError(f"环长比超过 3: ({a}, {b})")
    i = j = 0
    cross = [(0, a)]
    faces = []
    for _ in range(a + b):
        if j == b or (i < a and (i + 1) * b <= (j + 1) * a):
            faces.append((i % a, (i + 1) % a, a + j % b))
            i += 1
        else:
            faces.append((i % a, a + j % b, a + (j + 1) % b))
            j += 1
        if (i, j) != (a, b):
            cross.append((i % a, a + j % b))
    return AnnulusGadget(a=a, b=b, cross_edges=tuple(cross), faces=tuple(faces))


def build_bumpy_cylinder(w: WidthProfile) -> Cylinder:
    """堆叠环 C_{w(0)}, ..., C_{w(R)}，相邻层之间放三角化环带"""
    problems = w.violations()
    if problems:
        raise ProfileError(f"宽度剖面不合法: {problems}")
    offsets = np.concatenate([[0], np.cumsum(w.widths)]).astype(int).tolist()
    edges: List[Edge] = []
    faces: List[Face] = []
    levels: List[int] = []
    for t, width in enumerate(w.widths):
        base = offsets[t]
        edges.extend((base + i, base + (i + 1) % width) for i in range(width))
        levels.extend([t] * width)
    for t in range(w.R):
        a, b = w.widths[t], w.widths[t + 1]
        gadget = triangulated_annulus(a, b)

        def to_global(local: int, t=t, a=a) -> int:
            return offsets[t] + local if local < a else offsets[t + 1] + local - a

        edges.extend((to_global(x), to_global(y)) for x, y in gadget.cross_edges)
        faces.extend(tuple(to_global(x) for x in face) for face in gadget.faces)

    graph = from_edge_list(edges, vertex_count=offsets[-1])
    bottom = tuple(range(offsets[0], offsets[1]))
    top = tuple(range(offsets[-2], offsets[-1]))
    return Cylinder(graph=graph, faces=tuple(faces), levels=tuple(levels), bottom=bottom, top=top)


def cone_off(cyl: Cylinder) -> SphereTriangulation:
    """在两条边界 C_3 上各加一个锥点，闭合为球面"""
    if len(cyl.bottom) != 3 or len(cyl.top) != 3:
        raise ConstructionError(f"边界必须为 C_3: ({len(cyl.bottom)}, {len(cyl.top)})")
    n = cyl.graph.vertex_count
    edges = list(cyl.graph.edges)
    faces = list(cyl.faces)
    for apex, cycle in ((n, cyl.bottom), (n + 1, cyl.top)):
        edges.extend((apex, c) for c in cycle)
        faces.extend((apex, cycle[i], cycle[(i + 1) % 3]) for i in range(3))
    return SphereTriangulation(graph=from_edge_list(edges, vertex_count=n + 2), faces=tuple(faces))


@dataclass
class XnBuild:
    """流水线各阶段产物"""

    triangulation: SphereTriangulation
    rooted: RootedGraph
    rho: StepFunction
    profile: WidthProfile
    cylinder: Cylinder
    report: PipelineReport

    @property
    def apexes(self) -> Tuple[int, int]:
        n = self.triangulation.graph.vertex_count
        return (n - 2, n - 1)


def build_Xn(n: int, alpha: int, eps: Optional[float] = None, seed: int = 0) -> XnBuild:
    """build_Y → 距离密度 → 宽度剖面 → 凸凹圆柱 → 锥化"""
    eps = settings.DEFAULT_EPS if eps is None else eps
    rooted = build_Y(n, alpha, eps, seed)
    rho = distance_density(rooted.graph, rooted.root)
    profile = width_profile(rho)
    cylinder = build_bumpy_cylinder(profile)
    triangulation = cone_off(cylinder)
    validation = validate_sphere_triangulation(triangulation, DEGREE_CAP)
    if not validation.passed:
        raise ConstructionError(f"X_{n} 三角剖分校验失败: {validation.failures}")

    x_graph = triangulation.graph
    spec_x = lambda1(x_graph, seed=seed)
    spec_y = lambda1(rooted.graph, seed=seed)
    spec_cyl = lambda1(cylinder.graph, seed=seed)
    diam = diameter(x_graph)
    sigma = smooth_sigma(rho)
    lam_sturm = neumann_lambda1(sigma)

    report = PipelineReport(
        n=n,
        alpha=alpha,
        seed=seed,
        vol=x_graph.vol,
        diam=diam,
        lambda1=spec_x.lambda1,
        lambda1_Y=spec_y.lambda1,
        ratio_thm2=spec_x.lambda1 * (diam / math.log(diam)) ** 2,
        degree_max=x_graph.max_degree,
        validator=validation.to_dict(),
        vertex_count=x_graph.vertex_count,
        R=profile.R,
        max_width=max(profile.widths),
        vol_Y=rooted.graph.vol,
        diam_Y=diameter(rooted.graph),
        gap_ratio=spec_x.lambda1 / spec_y.lambda1,
        vol_below_diam_sq=x_graph.vol < diam ** 2,
        lambda1_cylinder=spec_cyl.lambda1,
        lambda1_sturm=lam_sturm,
        sturm_ratio=lam_sturm / spec_cyl.lambda1,
        invariance_ok=invariance_threshold_check(sigma, lam_sturm),
        sigma_band=sigma.c_band,
        provenance=dict(rooted.provenance),
        spectral={"X": spec_x.to_record(), "Y": spec_y.to_record(), "cylinder": spec_cyl.to_record()},
    )
    logger.info(
        f"X_{n}: V={report.vertex_count}, vol={report.vol}, diam={diam}, λ1={report.lambda1:.4e}, "
        f"thm2 比值={report.ratio_thm2:.4f}, 最大度={report.degree_max}"
    )
    return XnBuild(
        triangulation=triangulation,
        rooted=rooted,
        rho=rho,
        profile=profile,
        cylinder=cylinder,
        report=report,
    )
