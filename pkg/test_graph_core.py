"""
图核心模块测试
"""
import networkx as nx
import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from conftest import connected_graphs
from errors import EdgeListParseError, GraphError
from graph_core import (
    SphereTriangulation,
    bfs_distances,
    cycle_graph,
    diameter,
    diametral_pair,
    from_edge_list,
    grid_graph,
    octahedron,
    parse_edge_list,
    parse_triangulation,
    path_graph,
    point_diameter,
    subdivide,
    subdivide_edges,
    tetrahedron,
    theta_graph,
    to_edge_list_text,
    to_triangulation_text,
    validate_sphere_triangulation,
)


def _to_nx(g):
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(g.vertex_count))
    graph.add_edges_from(g.edges)
    return graph


def test_from_edge_list_canonicalises():
    """边按 u < v 规范化并排序"""
    g = from_edge_list([(2, 1), (0, 1)])
    assert g.edges == ((0, 1), (1, 2))
    assert g.vertex_count == 3
    assert g.vol == g.edge_count == 2


def test_from_edge_list_rejects_bad_input():
    with pytest.raises(GraphError):
        from_edge_list([(0, 0)])
    with pytest.raises(GraphError):
        from_edge_list([(-1, 2)])
    with pytest.raises(GraphError):
        from_edge_list([(0, 5)], vertex_count=3)


def test_multigraph_degrees_count_multiplicity():
    g = from_edge_list([(0, 1), (0, 1), (1, 2)])
    assert not g.is_simple()
    assert g.degrees.tolist() == [2, 3, 1]
    assert g.adjacency_matrix[0, 1] == 2


def test_bfs_matches_networkx(petersen, grid_4x6):
    for g in (petersen, grid_4x6):
        expected = nx.single_source_shortest_path_length(_to_nx(g), 0)
        dist = bfs_distances(g, 0)
        assert dist.tolist() == [expected[v] for v in range(g.vertex_count)]


def test_bfs_rejects_disconnected_and_bad_root(cycle16):
    with pytest.raises(GraphError):
        bfs_distances(from_edge_list([(0, 1), (2, 3)]), 0)
    with pytest.raises(GraphError):
        bfs_distances(cycle16, 16)


def test_known_diameters(petersen):
    assert diameter(petersen) == 2
    assert diameter(cycle_graph(16)) == 8
    assert diameter(path_graph(10)) == 9
    assert diameter(grid_graph(4, 6)) == 8


@given(connected_graphs())
def test_diameter_agrees_with_networkx(g):
    assert diameter(g) == nx.diameter(_to_nx(g))


@given(connected_graphs())
def test_double_sweep_bounds(g):
    lower = diameter(g, mode="double_sweep")
    exact = diameter(g)
    assert lower <= exact <= 2 * lower


@given(connected_graphs())
def test_diametral_pair_realises_diameter(g):
    p1, p2, diam = diametral_pair(g)
    assert bfs_distances(g, p1)[p2] == diam


@given(connected_graphs(), st.data())
def test_point_diameter_between_half_and_full(g, data):
    p = data.draw(st.integers(0, g.vertex_count - 1))
    diam = diameter(g)
    assert diam / 2 <= point_diameter(g, p) <= diam


@given(connected_graphs(max_vertices=20), st.integers(1, 5))
def test_subdivide_scales_distances(g, m):
    """原顶点之间的距离乘以 m"""
    h = subdivide(g, m)
    assert h.edge_count == m * g.edge_count
    assert h.vertex_count == g.vertex_count + (m - 1) * g.edge_count
    original = bfs_distances(g, 0)
    scaled = bfs_distances(h, 0)[: g.vertex_count]
    assert np.array_equal(scaled, m * original)


def test_subdivide_rejects_nonpositive():
    with pytest.raises(GraphError):
        subdivide(cycle_graph(4), 0)


def test_subdivide_edges_selected_only():
    g = cycle_graph(5)
    h = subdivide_edges(g, [0, 3])
    assert h.vertex_count == 7
    assert h.edge_count == 7
    assert h.degrees[5:].tolist() == [2, 2]
    assert diameter(h) == 3


def test_counts_on_petersen(petersen):
    assert petersen.trivalent_count() == 10
    assert petersen.cycle_rank() == 6
    assert petersen.degree_counts() == {3: 10}
    assert petersen.max_degree == 3


def test_theta_graph_shape():
    g = theta_graph((4, 6, 6))
    assert g.trivalent_count() == 2
    assert g.edge_count == 16
    assert g.cycle_rank() == 2
    with pytest.raises(GraphError):
        theta_graph((1, 1, 4))


def test_platonic_triangulations_valid():
    for tri in (tetrahedron(), octahedron()):
        report = validate_sphere_triangulation(tri, 12)
        assert report.passed, report.failures
        assert report.euler_characteristic == 2


def test_validator_reports_missing_face():
    tri = octahedron()
    broken = SphereTriangulation(graph=tri.graph, faces=tri.faces[:-1])
    report = validate_sphere_triangulation(broken, 12)
    assert not report.passed
    assert "euler" in report.failures
    assert "edge_in_two_faces" in report.failures


def test_validator_degree_cap():
    report = validate_sphere_triangulation(octahedron(), 3)
    assert report.failures == ["max_degree"]


def test_text_codecs():
    tri = octahedron()
    parsed = parse_triangulation(to_triangulation_text(tri))
    assert parsed.graph == tri.graph
    assert parsed.faces == tri.faces
    assert parse_edge_list(to_edge_list_text(cycle_graph(7))) == cycle_graph(7)


@pytest.mark.parametrize(
    "text, line",
    [
        ("3 2\n0 1\n1 x\n", 3),
        ("3 2\n0 1\n", 2),
        ("3 1\n0 1 2\n", 2),
        ("3 1\n0 1\n5 6\n", 3),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(EdgeListParseError) as info:
        parse_edge_list(text)
    assert info.value.line == line
    assert f"第 {line} 行" in str(info.value)
