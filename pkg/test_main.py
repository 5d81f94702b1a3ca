"""
命令行与产物存储测试
"""
import json
import math
from pathlib import Path

import pandas as pd
import pytest
from jsonschema import Draft202012Validator, validate

from artifact_store import ArtifactStore
from errors import ArtifactIOError
from family_y import RootedGraph
from graph_core import complete_graph, cycle_graph, octahedron, path_graph
from main import _certificate_ok, run
from reports import PUBLISHED_SCHEMAS

SCHEMA_DIR = Path(__file__).parent / "schemas"


def load_schema(name):
    return json.loads((SCHEMA_DIR / name).read_text(encoding="utf-8"))


def assert_valid(path, schema_name):
    """产物同时满足发布的模式与模型导出的模式"""
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    validate(instance=document, schema=load_schema(schema_name))
    validate(instance=document, schema=PUBLISHED_SCHEMAS[schema_name].model_json_schema())
    return document


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """日志文件与产物都落在临时目录"""
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def store(workdir):
    return ArtifactStore(workdir / "inputs")


def test_gen_rejects_odd_n(workdir):
    assert run(["gen", "--n", "9", "--seed", "7", "--out", "out"]) == 1
    assert not (workdir / "out").exists()


def test_gen_requires_seed(workdir):
    assert run(["gen", "--n", "8", "--out", "out"]) == 1


def test_verify_requires_inputs(workdir):
    assert run(["verify", "--out", "out"]) == 1


def test_unknown_option_is_config_error(workdir):
    assert run(["spectrum", "--bogus"]) == 1


def test_spectrum_on_cycle(workdir, store):
    path = store.write_graph("cycle32.g", cycle_graph(32))
    assert run(["spectrum", "--in", str(path), "--out", "out"]) == 0
    payload = assert_valid(workdir / "out" / "cycle32_spectrum.json", "spectrum.schema.json")
    assert payload["lambda1"] == pytest.approx(2 * (1 - math.cos(math.pi / 16)), abs=1e-10)
    assert payload["method"] == "dense"
    assert payload["metadata"]["app"] == "planar-gap"


def test_density_csv_integrates_to_edge_count(workdir, store):
    path = store.write_rooted("path.g", RootedGraph(graph=path_graph(9), root=4))
    assert run(["density", "--in", str(path), "--out", "out", "--format", "csv"]) == 0
    frame = pd.read_csv(workdir / "out" / "path_density.csv")
    assert list(frame.columns) == ["t_start", "t_end", "value"]
    assert ((frame["t_end"] - frame["t_start"]) * frame["value"]).sum() == pytest.approx(8.0)
    assert frame["value"].tolist() == [2]


def test_density_root_override(workdir, store):
    path = store.write_graph("path.g", path_graph(9))
    assert run(["density", "--in", str(path), "--out", "out", "--root", "0"]) == 0
    payload = assert_valid(workdir / "out" / "path_density.json", "density.schema.json")
    assert payload["root"] == 0
    assert payload["rows"] == [[0.0, 8.0, 1]]


def test_mixing_on_complete_graph(workdir, store):
    path = store.write_graph("k8.g", complete_graph(8))
    assert run(["mixing", "--in", str(path), "--out", "out"]) == 0
    payload = assert_valid(workdir / "out" / "k8_mixing.json", "mixing.schema.json")
    assert payload["tau"] <= 3
    assert payload["start_policy"] == "worst_exact"


def test_parse_error_exit_code(workdir):
    bad = workdir / "bad.g"
    bad.write_text("3 2\n0 1\n1 x\n", encoding="utf-8")
    assert run(["spectrum", "--in", str(bad), "--out", "out"]) == 3


def test_missing_input_exit_code(workdir):
    assert run(["spectrum", "--in", "missing.g", "--out", "out"]) == 3


def test_disconnected_input_exit_code(workdir, store):
    path = store.path("split.g")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("4 2\n0 1\n2 3\n", encoding="utf-8")
    assert run(["spectrum", "--in", str(path), "--out", "out"]) == 2


def test_store_load_any_detects_format(store):
    tri_path = store.write_triangulation("octa.tri", octahedron())
    rooted_path = store.write_rooted("p.g", RootedGraph(graph=path_graph(4), root=2))
    graph, root = store.load_any(tri_path)
    assert graph == octahedron().graph and root is None
    graph, root = store.load_any(rooted_path)
    assert graph == path_graph(4) and root == 2


def test_store_json_is_sorted_with_metadata(store):
    path = store.write_json("r.json", {"b": 1, "a": [1.5]})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert set(json.loads(text)["metadata"]) == {"app", "version", "generated_at"}
    bare = store.write_json("bare.json", {"x": 1}, metadata=False)
    assert json.loads(bare.read_text(encoding="utf-8")) == {"x": 1}


def test_store_digest_and_missing(store):
    first = store.write_graph("a.g", cycle_graph(5))
    second = store.write_graph("b.g", cycle_graph(5))
    assert store.digest(first) == store.digest(second)
    with pytest.raises(ArtifactIOError):
        store.digest(store.path("nope.g"))
    with pytest.raises(ArtifactIOError):
        store.load_json(first)


def test_gen_is_byte_deterministic(workdir):
    assert run(["gen", "--n", "8", "--seed", "7", "--out", "a"]) == 0
    assert run(["gen", "--n", "8", "--seed", "7", "--out", "b"]) == 0
    store = ArtifactStore()
    for name in ("X_8.tri", "Y_8.g", "rho_Y_8.csv", "sigma_Y_8.csv"):
        assert store.digest(workdir / "a" / name) == store.digest(workdir / "b" / name)
    sidecar = assert_valid(workdir / "a" / "X_8.json", "member_sidecar.schema.json")
    validate(instance=sidecar["report"], schema=load_schema("pipeline_report.schema.json"))
    assert sidecar["artifacts"] == {"X": "X_8.tri", "Y": "Y_8.g"}
    assert sidecar["report"]["degree_max"] <= 12
    family = assert_valid(workdir / "a" / "family.json", "family.schema.json")
    assert [m["n"] for m in family["members"]] == [8]


def test_verify_requires_sidecar(workdir):
    ArtifactStore(workdir / "lone").write_triangulation("X_8.tri", octahedron())
    assert run(["verify", "--in", str(workdir / "lone" / "X_8.tri"), "--out", "out"]) == 3


@pytest.mark.slow
def test_gen_then_verify(workdir):
    assert run(["gen", "--n", "8,16,32", "--seed", "1", "--out", "fam"]) == 0
    inputs = []
    for n in (8, 16, 32):
        inputs += ["--in", str(workdir / "fam" / f"X_{n}.tri")]
    code = run(["verify", *inputs, "--out", "fam", "--policy", "heuristic"])
    report = assert_valid(workdir / "fam" / "verify_report.json", "verify_report.schema.json")
    names = {check["name"]: check["passed"] for check in report["checks"]}
    assert names["structure_X_8"] and names["structure_X_32"]
    assert names["members_distinct"]
    assert names["thm1_cycle_ratio_bounded"]
    assert "noBC_bounded" in names
    assert code == (0 if all(names.values()) else 2)


@pytest.mark.parametrize("name", sorted(PUBLISHED_SCHEMAS))
def test_published_schema_matches_model(name):
    schema = load_schema(name)
    Draft202012Validator.check_schema(schema)
    model = PUBLISHED_SCHEMAS[name]
    assert set(schema["properties"]) - {"metadata"} == set(model.model_fields)
    required = {field for field, info in model.model_fields.items() if info.is_required()}
    assert required <= set(schema["required"]) <= set(model.model_fields)


def test_verify_measures_family_with_heuristic_starts(workdir, monkeypatch):
    """--policy 只作用于对照图族，X_n 总用锥点加双扫描端点"""
    assert run(["gen", "--n", "8", "--seed", "7", "--out", "fam"]) == 0
    monkeypatch.setattr("main.corpus_graphs", lambda: {"cycle_16": cycle_graph(16), "complete_8": complete_graph(8)})
    run(["verify", "--in", str(workdir / "fam" / "X_8.tri"), "--out", "fam", "--policy", "worst_exact"])
    report = assert_valid(workdir / "fam" / "verify_report.json", "verify_report.schema.json")
    rows = {row["label"]: row for row in report["mixing"]}
    assert rows["X_8"]["policy"] == "heuristic"
    assert rows["cycle_16"]["policy"] == "worst_exact"
    assert rows["complete_8"]["policy"] == "worst_exact"


def test_certificate_requires_lambda_below_achieved_quotient():
    certificate = {"bound_ok": True, "vertex_bound": None, "achieved_quotients": [0.02, 0.05]}
    assert _certificate_ok({"lambda1": 0.04, "certificate": certificate})
    assert not _certificate_ok({"lambda1": 0.06, "certificate": certificate})
    assert not _certificate_ok({"lambda1": 0.04, "certificate": dict(certificate, vertex_bound=0.03)})
    assert not _certificate_ok({"lambda1": 0.01, "certificate": dict(certificate, bound_ok=False)})
    assert not _certificate_ok({"lambda1": 0.01, "certificate": dict(certificate, achieved_quotients=[])})
    assert _certificate_ok({"lambda1": 1.0, "certificate": None})


def test_gen_wraps_unexpected_errors(workdir, monkeypatch):
    def broken(*args):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr("experiments.build_Xn", broken)
    assert run(["gen", "--n", "8", "--seed", "7", "--out", "out"]) == 2
    assert not (workdir / "out" / "family.json").exists()


def test_gen_keeps_toolkit_error_exit_code(workdir, monkeypatch):
    def unwritable(*args):
        raise ArtifactIOError("磁盘已满")

    monkeypatch.setattr("experiments.build_Xn", unwritable)
    assert run(["gen", "--n", "8", "--seed", "7", "--out", "out"]) == 3


def test_verify_rejects_malformed_sidecar(workdir):
    store = ArtifactStore(workdir / "bad")
    store.write_triangulation("X_8.tri", octahedron())
    store.write_json("X_8.json", {"report": {"n": 8}, "widths": [3, 3]})
    assert run(["verify", "--in", str(workdir / "bad" / "X_8.tri"), "--out", "out"]) == 3
