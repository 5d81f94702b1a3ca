"""
Y_n 图族测试：三正则采样、goodify 与构造来源
"""
import pytest

from density import bad_critical_values, distance_density
from errors import ConstructionError, EdgeListParseError, GraphError
from family_y import (
    RootedGraph,
    build_Y,
    certify_expander,
    goodify,
    local_jumps,
    parse_rooted,
    random_regular,
    to_rooted_text,
)
from graph_core import bfs_distances, complete_graph, cycle_graph, petersen_graph, star_graph, subdivide, theta_graph
from spectral import lambda1_dense


def _is_good(rg: RootedGraph) -> bool:
    return not bad_critical_values(distance_density(rg.graph, rg.root))


@pytest.mark.parametrize("n", [4, 10, 24])
def test_random_regular_is_simple_cubic(n):
    g = random_regular(n, seed=5)
    assert g.vertex_count == n
    assert g.degree_counts() == {3: n}
    assert g.is_simple()
    assert g.connected


def test_random_regular_is_seed_deterministic():
    assert random_regular(20, seed=3) == random_regular(20, seed=3)


def test_random_regular_rejects_odd():
    with pytest.raises(GraphError):
        random_regular(9, seed=1)


def test_certify_expander():
    assert certify_expander(petersen_graph(), 0.1)
    assert not certify_expander(cycle_graph(40), 0.1)


def test_local_jumps_sum_to_density_jumps():
    """每层顶点跳跃之和等于 ρ 在该整数点的跳跃"""
    g = subdivide(complete_graph(4), 3)
    dist = bfs_distances(g, 0)
    jumps = local_jumps(g, dist)
    cells = distance_density(g, 0).cells().tolist()
    padded = [0] + cells + [0]
    for level in range(int(dist.max()) + 1):
        expected = padded[2 * level + 1] - padded[2 * level]
        assert int(jumps[dist == level].sum()) == expected


def test_goodify_keeps_good_theta():
    rooted = RootedGraph(graph=theta_graph((4, 4, 4)), root=0)
    assert _is_good(rooted)
    result = goodify(rooted)
    assert result.graph == rooted.graph
    assert result.provenance["goodify_rounds"] == 0


def test_goodify_splits_coincident_local_maxima():
    """两条长路径的局部最大值同层，跳跃 -4"""
    rooted = RootedGraph(graph=theta_graph((3, 5, 5)), root=0)
    bad = bad_critical_values(distance_density(rooted.graph, 0))
    assert [(c.t, c.jump) for c in bad] == [(4.0, -4)]
    result = goodify(rooted)
    assert _is_good(result)
    assert result.provenance["goodify_rounds"] == 1
    assert result.provenance["goodify_edges"] == 2
    assert result.graph.vertex_count == rooted.graph.vertex_count + 2


def test_goodify_subdivided_k4():
    """三条折叠边先分开，再处理同层的局部最大值"""
    rooted = RootedGraph(graph=subdivide(complete_graph(4), 5), root=0)
    bad = bad_critical_values(distance_density(rooted.graph, 0))
    assert [(c.t, c.jump) for c in bad] == [(7.5, -6)]
    result = goodify(rooted)
    assert _is_good(result)
    assert result.provenance["goodify_rounds"] == 2
    assert result.provenance["goodify_edges"] == 4


@pytest.mark.parametrize(
    "graph",
    [
        theta_graph((3, 5, 5)),
        theta_graph((4, 4, 4)),
        subdivide(complete_graph(4), 5),
    ],
    ids=["theta_355", "theta_444", "k4"],
)
def test_goodify_keeps_homeomorphism_type(graph):
    result = goodify(RootedGraph(graph=graph, root=0))
    assert _is_good(result)
    assert result.graph.cycle_rank() == graph.cycle_rank()
    assert result.graph.trivalent_count() == graph.trivalent_count()
    assert result.graph.max_degree == 3


def test_build_Y_keeps_base_homeomorphism_type(y8):
    """三正则基图 n = 8：8 个三价顶点，圈秩 n/2 + 1"""
    assert y8.graph.trivalent_count() == 8
    assert y8.graph.cycle_rank() == 5


def test_goodify_preserves_density_below_treated_level():
    rooted = RootedGraph(graph=subdivide(complete_graph(4), 5), root=0)
    before = distance_density(rooted.graph, 0).cells()
    after = distance_density(goodify(rooted).graph, 0).cells()
    assert after[:15].tolist() == before[:15].tolist()


def test_goodify_preconditions():
    with pytest.raises(ConstructionError):
        goodify(RootedGraph(graph=star_graph(4), root=1))
    with pytest.raises(ConstructionError):
        goodify(RootedGraph(graph=star_graph(3), root=0))


def test_build_Y_provenance(y8):
    provenance = y8.provenance
    assert provenance["base_n"] == 8
    assert provenance["m"] == 8
    assert provenance["base_lambda1"] >= 0.1
    assert provenance["goodify_rounds"] <= 4 * y8.graph.trivalent_count() + 2
    assert y8.graph.trivalent_count() == 8
    assert y8.graph.max_degree == 3
    assert _is_good(y8)


def test_build_Y_uses_certified_expander(monkeypatch):
    """未通过认证的候选被丢弃，尝试次数记入来源"""
    calls = []

    def certify_second(g, eps):
        calls.append(g)
        return len(calls) >= 2

    monkeypatch.setattr("family_y.certify_expander", certify_second)
    rooted = build_Y(8, 0, 0.1, seed=3)
    assert rooted.provenance["expander_attempt"] == 1
    assert len(calls) == 2


@pytest.mark.parametrize("n", [8, 12, 16, 20])
def test_build_Y_volume_scaling(n):
    """细分后的边数为 1.5·n·m，goodify 只增加边"""
    rooted = build_Y(n, 1, 0.1, seed=1)
    ratio = rooted.graph.vol / n ** 2
    assert 1.5 <= ratio <= 3.0
    assert rooted.graph.vol == 3 * n * n // 2 + rooted.provenance["goodify_edges"]


def test_build_Y_is_deterministic(y8):
    again = build_Y(8, 1, 0.1, seed=7)
    assert again.graph == y8.graph
    assert again.root == y8.root


def test_build_Y_rejects_bad_parameters():
    with pytest.raises(GraphError):
        build_Y(7, 1, 0.1, seed=0)
    with pytest.raises(GraphError):
        build_Y(8, -1, 0.1, seed=0)


def test_build_Y_expander_budget():
    with pytest.raises(ConstructionError):
        build_Y(8, 0, 100.0, seed=0)


def test_rooted_text_codec(y8):
    parsed = parse_rooted(to_rooted_text(y8))
    assert parsed.graph == y8.graph
    assert parsed.root == y8.root
    with pytest.raises(EdgeListParseError):
        parse_rooted("2 1\n0 1\n")
    with pytest.raises(EdgeListParseError):
        parse_rooted("2 1\n0 1\nroot 9\n")


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0, 1])
@pytest.mark.parametrize("n", range(4, 33, 2))
def test_goodify_postcondition_sweep(n, alpha):
    for seed in range(5):
        rooted = build_Y(n, alpha, 0.1, seed=seed)
        assert _is_good(rooted)
        assert rooted.provenance["goodify_rounds"] <= 4 * rooted.graph.trivalent_count() + 2


def test_subdivision_gap_is_nonincreasing():
    gaps = [lambda1_dense(subdivide(petersen_graph(), m)).lambda1 for m in (1, 2, 3, 4, 6, 8)]
    assert gaps[0] == pytest.approx(2.0, abs=1e-10)
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


@pytest.mark.slow
def test_subdivision_scaling_band():
    """固定扩张图细分 m 倍后 m²·λ1 落在比值 ≤ 4 的带内"""
    base = random_regular(24, seed=11)
    assert certify_expander(base, 0.1)
    sizes = (4, 8, 16, 32)
    gaps = [lambda1_dense(subdivide(base, m)).lambda1 for m in sizes]
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
    scaled = [m * m * gap for m, gap in zip(sizes, gaps)]
    assert max(scaled) / min(scaled) <= 4
