"""
图核心模块：图表示、遍历、度量与三角剖分校验
"""
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from loguru import logger

from errors import EdgeListParseError, GraphError

Edge = Tuple[int, int]
Face = Tuple[int, int, int]

# 精确直径时每批 BFS 的根数
_DIAMETER_BATCH = 256


@dataclass(frozen=True)
class Graph:
    """无向单位边长多重图，边按 (u, v), u < v 规范排序"""

    vertex_count: int
    edges: Tuple[Edge, ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def vol(self) -> int:
        """体积约定为边数"""
        return len(self.edges)

    @cached_property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        neighbors: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            neighbors[u].append(v)
            neighbors[v].append(u)
        return tuple(tuple(sorted(row)) for row in neighbors)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.vertex_count, dtype=np.int64)
        if self.edges:
            arr = np.asarray(self.edges, dtype=np.int64)
            np.add.at(deg, arr[:, 0], 1)
            np.add.at(deg, arr[:, 1], 1)
        return deg

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        """邻接矩阵（重边计重数）"""
        n = self.vertex_count
        if not self.edges:
            return sp.csr_matrix((n, n), dtype=np.float64)
        arr = np.asarray(self.edges, dtype=np.int64)
        rows = np.concatenate([arr[:, 0], arr[:, 1]])
        cols = np.concatenate([arr[:, 1], arr[:, 0]])
        data = np.ones(len(rows), dtype=np.float64)
        matrix = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
        matrix.sum_duplicates()
        return matrix

    @cached_property
    def connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        count, _ = csgraph.connected_components(self.adjacency_matrix, directed=False)
        return count == 1

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.vertex_count else 0

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def is_simple(self) -> bool:
        return len(set(self.edges)) == len(self.edges)

    def degree_counts(self) -> Dict[int, int]:
        return dict(sorted(Counter(self.degrees.tolist()).items()))

    def trivalent_count(self) -> int:
        return int(np.count_nonzero(self.degrees == 3))

    def cycle_rank(self) -> int:
        count, _ = csgraph.connected_components(self.adjacency_matrix, directed=False)
        return self.edge_count - self.vertex_count + int(count)


@dataclass(frozen=True)
class SphereTriangulation:
    """球面三角剖分：图与三角面列表"""

    graph: Graph
    faces: Tuple[Face, ...]


@dataclass
class ValidationReport:
    """三角剖分校验报告"""

    checks: Dict[str, bool] = field(default_factory=dict)
    vertex_count: int = 0
    edge_count: int = 0
    face_count: int = 0
    euler_characteristic: int = 0
    max_degree: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "checks": dict(self.checks),
            "V": self.vertex_count,
            "E": self.edge_count,
            "F": self.face_count,
            "euler": self.euler_characteristic,
            "max_degree": self.max_degree,
            "failures": list(self.failures),
        }


def from_edge_list(pairs: Iterable[Sequence[int]], vertex_count: Optional[int] = None) -> Graph:
    """由边对列表构造图；允许重边，拒绝自环"""
    edges: List[Edge] = []
    top = -1
    for pair in pairs:
        u, v = int(pair[0]), int(pair[1])
        if u == v:
            raise GraphError(f"不允许自环: ({u}, {v})")
        if u < 0 or v < 0:
            raise GraphError(f"顶点编号不能为负: ({u}, {v})")
        edges.append((u, v) if u < v else (v, u))
        top = max(top, u, v)
    n = top + 1 if vertex_count is None else int(vertex_count)
    if top >= n:
        raise GraphError(f"顶点编号 {top} 超出范围 [0, {n})")
    graph = Graph(vertex_count=n, edges=tuple(sorted(edges)))
    if not graph.connected:
        logger.debug(f"构造了不连通图: V={n}, E={len(edges)}")
    return graph


def require_connected(g: Graph) -> None:
    """分析入口要求连通图"""
    if not g.connected:
        raise GraphError(f"图不连通 (V={g.vertex_count}, E={g.edge_count})")


def _check_vertex(g: Graph, v: int) -> None:
    if not 0 <= v < g.vertex_count:
        raise GraphError(f"顶点 {v} 超出范围 [0, {g.vertex_count})")


def bfs_distances(g: Graph, root: int) -> np.ndarray:
    """单源 BFS 距离向量"""
    _check_vertex(g, root)
    require_connected(g)
    dist = csgraph.shortest_path(g.adjacency_matrix, directed=False, unweighted=True, indices=root)
    return dist.astype(np.int64)


def _eccentricity_batches(g: Graph):
    n = g.vertex_count
    for start in range(0, n, _DIAMETER_BATCH):
        roots = np.arange(start, min(start + _DIAMETER_BATCH, n))
        dist = csgraph.shortest_path(g.adjacency_matrix, directed=False, unweighted=True, indices=roots)
        yield roots, dist


def diametral_pair(g: Graph) -> Tuple[int, int, int]:
    """精确直径及一对实现直径的顶点 (p1, p2, diam)"""
    require_connected(g)
    best = (0, 0, 0)
    for roots, dist in _eccentricity_batches(g):
        ecc = dist.max(axis=1)
        i = int(np.argmax(ecc))
        if ecc[i] > best[2]:
            best = (int(roots[i]), int(np.argmax(dist[i])), int(ecc[i]))
    return best


def diameter(g: Graph, mode: str = "exact") -> int:
    """直径；exact 为全源 BFS，double_sweep 返回下界 L 满足 diam ∈ [L, 2L]"""
    require_connected(g)
    if mode == "exact":
        return diametral_pair(g)[2]
    if mode == "double_sweep":
        first = bfs_distances(g, 0)
        far = int(np.argmax(first))
        return int(bfs_distances(g, far).max())
    raise GraphError(f"未知直径模式: {mode}")


def double_sweep_endpoint(g: Graph, start: int = 0) -> int:
    """双扫描得到的一个近直径端点"""
    first = bfs_distances(g, start)
    return int(np.argmax(first))


def point_diameter(g: Graph, p: int) -> int:
    """diam_p = max_x d(p, x)"""
    return int(bfs_distances(g, p).max())


def subdivide(g: Graph, m: int) -> Graph:
    """每条边替换为 m 条单位边组成的路径"""
    if m < 1:
        raise GraphError(f"细分次数必须为正整数: {m}")
    if m == 1:
        return g
    edges: List[Edge] = []
    next_id = g.vertex_count
    for u, v in g.edges:
        chain = [u] + list(range(next_id, next_id + m - 1)) + [v]
        next_id += m - 1
        edges.extend(zip(chain[:-1], chain[1:]))
    return from_edge_list(edges, vertex_count=next_id)


def subdivide_edges(g: Graph, edge_ids: Iterable[int]) -> Graph:
    """把指定的边各细分为两条单位边，新顶点按边序编号"""
    chosen = set(int(i) for i in edge_ids)
    edges: List[Edge] = []
    next_id = g.vertex_count
    for index, (u, v) in enumerate(g.edges):
        if index in chosen:
            edges.append((u, next_id))
            edges.append((next_id, v))
            next_id += 1
        else:
            edges.append((u, v))
    return from_edge_list(edges, vertex_count=next_id)


def incident_edges(g: Graph) -> List[List[int]]:
    """每个顶点关联的边编号"""
    incidence: List[List[int]] = [[] for _ in range(g.vertex_count)]
    for index, (u, v) in enumerate(g.edges):
        incidence[u].append(index)
        incidence[v].append(index)
    return incidence


def validate_sphere_triangulation(t: SphereTriangulation, d_max: int) -> ValidationReport:
    """校验球面三角剖分：欧拉关系、每边两面、简单性、度上界、连通性"""
    g = t.graph
    report = ValidationReport(
        vertex_count=g.vertex_count,
        edge_count=g.edge_count,
        face_count=len(t.faces),
        max_degree=g.max_degree,
    )
    report.euler_characteristic = g.vertex_count - g.edge_count + len(t.faces)
    report.checks["euler"] = report.euler_characteristic == 2

    edge_set = set(g.edges)
    face_edges: Counter = Counter()
    faces_ok = True
    for face in t.faces:
        a, b, c = face
        if len({a, b, c}) != 3:
            faces_ok = False
            continue
        for x, y in ((a, b), (b, c), (a, c)):
            key = (x, y) if x < y else (y, x)
            if key not in edge_set:
                faces_ok = False
            face_edges[key] += 1
    report.checks["faces_are_triangles"] = faces_ok
    report.checks["edge_in_two_faces"] = all(face_edges.get(e, 0) == 2 for e in edge_set) and all(
        count == 2 for count in face_edges.values()
    )
    report.checks["simple"] = g.is_simple()
    report.checks["max_degree"] = g.max_degree <= d_max
    report.checks["connected"] = g.connected

    report.failures = [name for name, ok in report.checks.items() if not ok]
    if report.failures:
        logger.warning(f"三角剖分校验失败: {report.failures}")
    return report


# ---------------------------------------------------------------------------
# 文本格式
# ---------------------------------------------------------------------------

def to_edge_list_text(g: Graph) -> str:
    """边列表格式：首行 "V E"，随后 E 行 "u v" """
    lines = [f"{g.vertex_count} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def _parse_ints(line: str, count: int, number: int) -> List[int]:
    parts = line.split()
    if len(parts) != count:
        raise EdgeListParseError(f"期望 {count} 个整数，实际为 {line!r}", number)
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise EdgeListParseError(f"无法解析整数: {line!r}", number)


def _parse_edge_block(lines: List[str]) -> Tuple[Graph, int]:
    if not lines:
        raise EdgeListParseError("空文件", 1)
    vertex_count, edge_count = _parse_ints(lines[0], 2, 1)
    if len(lines) < edge_count + 1:
        raise EdgeListParseError(f"声明 {edge_count} 条边，但只有 {len(lines) - 1} 行", len(lines))
    pairs = [_parse_ints(lines[i], 2, i + 1) for i in range(1, edge_count + 1)]
    try:
        graph = from_edge_list(pairs, vertex_count=vertex_count)
    except GraphError as e:
        raise EdgeListParseError(str(e), None)
    return graph, edge_count + 1


def parse_edge_list(text: str) -> Graph:
    """解析边列表文本"""
    lines = text.splitlines()
    graph, used = _parse_edge_block(lines)
    extra = [line for line in lines[used:] if line.strip()]
    if extra:
        raise EdgeListParseError(f"多余内容: {extra[0]!r}", used + 1)
    return graph


def to_triangulation_text(t: SphereTriangulation) -> str:
    """三角剖分格式：边列表后接 "faces F" 与 F 行 "a b c" """
    lines = [f"faces {len(t.faces)}"]
    lines.extend(f"{a} {b} {c}" for a, b, c in t.faces)
    return to_edge_list_text(t.graph) + "\n".join(lines) + "\n"


def parse_triangulation(text: str) -> SphereTriangulation:
    """解析三角剖分文本"""
    lines = text.splitlines()
    graph, used = _parse_edge_block(lines)
    if used >= len(lines) or not lines[used].startswith("faces "):
        raise EdgeListParseError("缺少 faces 分隔行", used + 1)
    try:
        face_count = int(lines[used].split()[1])
    except (IndexError, ValueError):
        raise EdgeListParseError(f"无法解析面数: {lines[used]!r}", used + 1)
    faces = []
    for i in range(used + 1, used + 1 + face_count):
        if i >= len(lines):
            raise EdgeListParseError(f"声明 {face_count} 个面，但文件提前结束", i + 1)
        a, b, c = _parse_ints(lines[i], 3, i + 1)
        faces.append((a, b, c))
    return SphereTriangulation(graph=graph, faces=tuple(faces))


# ---------------------------------------------------------------------------
# 对照图族
# ---------------------------------------------------------------------------

def path_graph(k: int) -> Graph:
    """k 个顶点的路径 P_k"""
    return from_edge_list([(i, i + 1) for i in range(k - 1)], vertex_count=k)


def cycle_graph(k: int) -> Graph:
    """k 个顶点的圈 C_k"""
    if k < 3:
        raise GraphError(f"圈至少需要 3 个顶点: {k}")
    return from_edge_list([(i, (i + 1) % k) for i in range(k)], vertex_count=k)


def complete_graph(n: int) -> Graph:
    return from_edge_list([(i, j) for i in range(n) for j in range(i + 1, n)], vertex_count=n)


def star_graph(k: int) -> Graph:
    """中心为 0、k 片叶子的星图 K_{1,k}"""
    return from_edge_list([(0, i) for i in range(1, k + 1)], vertex_count=k + 1)


def grid_graph(rows: int, cols: int) -> Graph:
    def vid(r: int, c: int) -> int:
        return r * cols + c

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    return from_edge_list(edges, vertex_count=rows * cols)


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edge_list(outer + spokes + inner, vertex_count=10)


def theta_graph(lengths: Sequence[int]) -> Graph:
    """两个三价顶点 0、1 由三条给定长度的路径相连"""
    if len(lengths) != 3 or min(lengths) < 1:
        raise GraphError(f"需要三条正长度路径: {lengths}")
    if sorted(lengths)[1] < 2:
        raise GraphError(f"至多一条路径可以是单边: {lengths}")
    edges: List[Edge] = []
    next_id = 2
    for length in lengths:
        chain = [0] + list(range(next_id, next_id + length - 1)) + [1]
        next_id += length - 1
        edges.extend(zip(chain[:-1], chain[1:]))
    return from_edge_list(edges, vertex_count=next_id)


def tetrahedron() -> SphereTriangulation:
    return SphereTriangulation(
        graph=complete_graph(4),
        faces=((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)),
    )


def octahedron() -> SphereTriangulation:
    # 两极 0、5，赤道 1-2-3-4
    equator = [1, 2, 3, 4]
    edges = []
    faces = []
    for i, a in enumerate(equator):
        b = equator[(i + 1) % 4]
        edges.extend([(a, b), (0, a), (5, a)])
        faces.extend([(0, a, b), (5, a, b)])
    return SphereTriangulation(graph=from_edge_list(edges, vertex_count=6), faces=tuple(faces))
