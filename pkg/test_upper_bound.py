"""
上界模块测试：区间选择、帐篷函数与证书
"""
import math

import numpy as np
import pytest

from density import StepFunction
from errors import CertificateError, GraphError
from graph_core import cycle_graph, from_edge_list, grid_graph, path_graph
from spectral import lambda1_dense
from upper_bound import (
    choose_interval,
    interval_masses,
    tent_certificate,
    tent_function,
    verify_thm1,
)


def test_interval_masses_prefix_zero():
    rho = StepFunction(breakpoints2=(0, 40), values=(2,))
    masses = interval_masses(rho, 3, 5.0)
    assert masses == pytest.approx([0.0, 10.0, 10.0, 10.0])


def test_choose_interval_prefers_smallest_ratio():
    assert choose_interval([0.0, 1.0, 1.0, 1.0], 3) == (1, 1.0)
    j, ratio = choose_interval([0.0, 1.0, 10.0, 1.0, 10.0], 4)
    assert j == 2
    assert ratio == pytest.approx(0.2)


def test_tent_shapes():
    first = tent_function(1, 2.0)
    assert first.nodes == (0.0, 2.0, 4.0)
    assert first(np.array([0.0, 1.0, 3.0, 5.0])).tolist() == [2.0, 2.0, 1.0, 0.0]
    middle = tent_function(3, 2.0)
    assert middle.nodes == (2.0, 4.0, 6.0, 8.0)
    assert middle(np.array([1.0, 3.0, 5.0, 7.0, 9.0])).tolist() == [0.0, 1.0, 2.0, 1.0, 0.0]


def test_cycle_certificate():
    """C_1000 取 V = 2, r = 1，k = 6"""
    g = cycle_graph(1000)
    cert = tent_certificate(g, 2.0, 1.0)
    assert cert.k == 6
    assert cert.bound == pytest.approx((1 + math.log(3)) * 6 / math.exp(6))
    assert cert.bound_ok
    assert cert.ratio_ok
    lam = lambda1_dense(g).lambda1
    assert lam <= max(cert.achieved_quotients)
    assert cert.vertex_bound is not None
    assert lam <= cert.vertex_bound


def test_path_certificate():
    g = path_graph(100)
    cert = tent_certificate(g, 1.0, 2.0)
    assert cert.k == 3
    assert set(cert.roots) == {0, 99}
    assert max(cert.ratios) <= cert.ratio_limit
    assert max(cert.achieved_quotients) <= cert.bound
    assert lambda1_dense(g).lambda1 <= max(cert.achieved_quotients)


def test_certificate_threshold():
    with pytest.raises(CertificateError):
        tent_certificate(path_graph(11), 1.0, 2.0)


def test_certificate_volume_hypothesis():
    with pytest.raises(CertificateError):
        tent_certificate(cycle_graph(100), 1.0, 0.5)


def test_certificate_to_dict():
    payload = tent_certificate(cycle_graph(200), 1.0, 2.0).to_dict()
    assert {"k", "j", "F1", "F2", "bound", "achieved_quotients", "vertex_bound"} <= set(payload)


def test_verify_thm1_tent_branch_on_grid():
    report = verify_thm1(grid_graph(16, 16), 4)
    assert report.branch == "TENT"
    assert report.degree_ok
    assert report.certificate["bound_ok"]
    assert report.lambda1 <= report.bound_value


def test_verify_thm1_spielman_teng_branch():
    """vol > diam² 时走 ST 分支"""
    clique = [(i, j) for i in range(10) for j in range(i + 1, 10)]
    tail = [(9, 10), (10, 11), (11, 12)]
    g = from_edge_list(clique + tail)
    report = verify_thm1(g, 12)
    assert report.diam == 4
    assert report.vol == 48
    assert report.branch == "ST"
    assert report.certificate is None
    assert report.c_fit == pytest.approx(report.lambda1 * 48)


@pytest.mark.parametrize("k", [32, 64, 128, 256])
def test_cycle_ratio_bounded(k):
    report = verify_thm1(cycle_graph(k), 2)
    assert report.branch == "TENT"
    assert report.ratio < 4 * math.pi ** 2


def test_verify_thm1_rejects_small_diameter():
    with pytest.raises(GraphError):
        verify_thm1(cycle_graph(4), 2)
