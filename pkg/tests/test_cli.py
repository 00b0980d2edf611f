import io
import json
import subprocess
import sys

import pytest

from quadrop.cli import run
from quadrop.formats import algebra_from_json, algebra_to_json, dumps, load_fixture, resolve_fixture
from quadrop.moduli import component_algebra
from quadrop.qa_core import black, polynomial_algebra, unit_black


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    text = buf.getvalue()
    assert text.endswith("\n") and text.count("\n") == 1
    doc = json.loads(text)
    assert doc["exit_code"] == code
    return code, doc, text


# -------------------------------------------------------------- examples


def test_keel_dims_example():
    code, doc, _ = call("qa", "dims", "--algebra", "keel:m=5", "--max-degree", "3")
    assert code == 0 and doc["dims"] == [1, 5, 1, 0]


def test_present_m4():
    code, doc, _ = call("moduli", "present", "--m", "4")
    assert code == 0 and doc["dim1"] == 1 and doc["n"] == 3


def test_frobenius_fixture_check():
    code, doc, _ = call("check", "hypercom", "--fixture", "frobenius_p1.json")
    assert code == 0 and doc["violations"] == [] and doc["ok"]


def test_quantum_fixture_check():
    code, doc, _ = call("check", "hypercom", "--fixture", "quantum_p1.json")
    assert code == 0 and doc["m1_identity"]


def test_palgebra_fixtures():
    for name in ("trivial_palgebra.json", "quantum_p1_palgebra.json"):
        code, doc, _ = call("check", "palgebra", "--fixture", name)
        assert code == 0, doc


def test_pullback_rows():
    code, doc, _ = call("moduli", "pullback", "--m", "5", "--labels", "1,2,3,4,5", "--subset", "1,2",
                        "--bullet", "6", "--star", "7")
    assert code == 0
    rows = {tuple(r["delta"]): r["image"] for r in doc["delta_images"]}
    assert rows[(1, 3)] == []
    names = doc["right_h2_basis"]
    assert len(names) == 1
    (coef, left_key, right_key), = rows[(1, 2)]
    assert coef == "-1" and left_key == [0, 0] and right_key == [1, 0]
    (coef, left_key, right_key), = rows[(1, 2, 5)]  # normalized side of {3, 4}
    assert coef == "1" and left_key == [0, 0] and right_key == [1, 0]


def test_koszul_output():
    code, doc, _ = call("qa", "koszul", "--algebra", "keel:m=5", "--max-degree", "4")
    assert code == 0 and doc["consistent"]
    assert doc["dual_dims"] == doc["forced_dual_dims"] == [1, 5, 24, 115, 551]


def test_reduce_and_psi():
    code, doc, _ = call("moduli", "reduce", "--m", "4", "--labels", "1,2,3,4", "--expr", '[["1",[1,2]],["-1",[1,3]]]')
    assert code == 0 and doc["coordinates"] == {}
    code, doc, _ = call("moduli", "psi", "--m", "5", "--i", "1", "--j", "2", "--k", "3")
    assert code == 0 and doc["coordinates"]


def test_comult_and_relabel():
    code, doc, _ = call("moduli", "comult", "--n", "5", "--splits", "[[1,2],[3,4,5]]", "--check-orders")
    assert code == 0 and doc["target_dim1"] == 1 and doc["order_independent"]
    code, doc, _ = call("moduli", "relabel", "--m", "5", "--perm", "0,2,1,3,4")
    assert code == 0 and doc["order"] == 2 and doc["square_is_identity"]


def test_enrich_commands():
    code, doc, _ = call("enrich", "j", "--algebra", "P:4")
    assert code == 0 and doc["valid"]
    code, doc, _ = call("enrich", "mu", "--a", "poly:2", "--b", "unit-black", "--c", "free:2")
    assert code == 0 and doc["is_morphism"]
    code, doc, _ = call("enrich", "e", "--source", "poly:2", "--target", "unit-black")
    assert code == 0
    code, doc, _ = call("enrich", "action-space", "--pn", "P:3", "--q", "unit-white", "--n", "2")
    assert code == 0 and doc["dim1"] == 4


def test_tree_check():
    code, doc, _ = call("check", "tree", "--tree", '{"vertices":[0,1],"edges":[[0,1]],"tails":{"0":0,"1":0,"2":1,"3":1}}')
    assert code == 0 and doc["valid"]
    code, doc, _ = call("check", "tree", "--tree", '{"vertices":[0,1],"edges":[[0,1]],"tails":{"0":0,"1":0,"2":0,"3":1}}')
    assert code == 1 and doc["diagnostics"]


# ----------------------------------------------------------- exit codes


def test_is_morphism_failure_has_witness():
    code, doc, _ = call("qa", "is-morphism", "--source", "unit-black", "--target", "unit-white", "--map", '[["1"]]')
    assert code == 1 and doc["witness"]["relation_index"] == 0
    code, doc, _ = call("qa", "is-morphism", "--source", "unit-white", "--target", "unit-black", "--map", '[["1"]]')
    assert code == 0 and doc["is_morphism"]


@pytest.mark.parametrize(
    "argv",
    [
        ["qa", "nothing"],
        ["moduli", "present", "--m", "9"],
        ["moduli", "present", "--m", "3"],
        ["qa", "dual", "--algebra", "/nonexistent.json"],
        ["qa", "is-morphism", "--source", "unit-black", "--target", "unit-white", "--map", "[[0.5]]"],
        ["qa", "is-morphism", "--source", "unit-black", "--target", "unit-white", "--map", "[["],
        ["moduli", "reduce", "--m", "5", "--expr", '[["1",[0]]]'],
        ["check", "hypercom", "--fixture", "trivial_palgebra.json"],
    ],
)
def test_usage_errors_exit_2(argv):
    code, doc, _ = call(*argv)
    assert code == 2 and doc["error"] and doc["detail"]


def test_malformed_json_file_reports_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dim1": 2,\n "relations": [}\n')
    code, doc, _ = call("qa", "dual", "--algebra", str(p))
    assert code == 2 and "line 2" in doc["detail"]


def test_resource_bound_exit_3(monkeypatch):
    monkeypatch.setenv("QUADROP_MAX_AMBIENT", "100")
    code, doc, _ = call("qa", "dims", "--algebra", "free:3", "--max-degree", "6")
    assert code == 3


def test_max_marks_raises_bound():
    code, doc, _ = call("moduli", "psi", "--m", "8", "--i", "0", "--j", "1", "--k", "2")
    assert code == 2
    code, doc, _ = call("--max-marks", "8", "moduli", "psi", "--m", "8", "--i", "0", "--j", "1", "--k", "2")
    assert code == 0 and doc["coordinates"]


# ------------------------------------------------------ formats, determinism


def test_algebra_round_trip(tmp_path):
    A = black(polynomial_algebra(2), unit_black())
    doc = algebra_to_json(A)
    assert algebra_to_json(algebra_from_json(doc)) == doc
    p = tmp_path / "a.json"
    p.write_text(dumps(doc))
    code, out, _ = call("qa", "dual", "--algebra", str(p))
    code2, out2, _ = call("qa", "dual", "--algebra", "poly:2")
    assert algebra_from_json(out["algebra"]).relations == algebra_from_json(out2["algebra"]).relations


def test_keel_algebra_round_trip():
    A = component_algebra(4)
    assert algebra_from_json(algebra_to_json(A)) == A


def test_dims_report_round_trip():
    _, doc, text = call("qa", "dims", "--algebra", "poly:2", "--max-degree", "3")
    assert dumps(json.loads(text)) + "\n" == text


def test_fixture_file_argument(tmp_path):
    data = load_fixture("frobenius_p1.json")
    assert data.n_max == 5
    src = json.loads(resolve_fixture("frobenius_p1.json").read_text())
    src["h"] = [["0", "1"], ["0", "0"]]
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(src))
    code, doc, _ = call("check", "hypercom", "--fixture", str(p))
    assert code == 1 and doc["violations"][0]["axiom"] == "form"


def test_determinism_and_digest():
    a = call("moduli", "pullback", "--m", "6", "--subset", "1,2,3")[2]
    b = call("moduli", "pullback", "--m", "6", "--subset", "1,2,3")[2]
    assert a == b
    c = call("moduli", "pullback", "--m", "6", "--subset", "1,2")[2]
    assert json.loads(a)["input_digest"] != json.loads(c)["input_digest"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "quadrop", "moduli", "present", "--m", "5"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["dim1"] == 5
