"""
测试公共夹具与 hypothesis 配置
"""
import os

import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest

from graph_core import Graph, cycle_graph, from_edge_list, grid_graph, petersen_graph

hypothesis.settings.register_profile("fast", max_examples=15, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis.settings.register_profile("debugger", max_examples=5, deadline=None, report_multiple_bugs=False)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 桌面规模的验收运行")


def random_connected_graph(rng: np.random.Generator, n: int, extra: int) -> Graph:
    """随机生成树加 extra 条额外简单边"""
    order = rng.permutation(n)
    edges = {tuple(sorted((int(order[i]), int(order[rng.integers(0, i)])))) for i in range(1, n)}
    attempts = 0
    while len(edges) < n - 1 + extra and attempts < 20 * (extra + 1):
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u != v:
            edges.add((min(u, v), max(u, v)))
        attempts += 1
    return from_edge_list(sorted(edges), vertex_count=n)


@st.composite
def connected_graphs(draw, min_vertices: int = 3, max_vertices: int = 40):
    """hypothesis 策略：随机连通简单图"""
    n = draw(st.integers(min_vertices, max_vertices))
    extra = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_connected_graph(np.random.default_rng(seed), n, extra)


@pytest.fixture
def cycle16() -> Graph:
    return cycle_graph(16)


@pytest.fixture
def petersen() -> Graph:
    return petersen_graph()


@pytest.fixture
def grid_4x6() -> Graph:
    return grid_graph(4, 6)


@pytest.fixture(scope="session")
def y8():
    from family_y import build_Y

    return build_Y(8, 1, 0.1, seed=7)


@pytest.fixture(scope="session")
def x8():
    from cylinder import build_Xn

    return build_Xn(8, 1, 0.1, seed=7)
