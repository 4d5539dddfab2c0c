import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from addcomb import GroupSet, GroupSpec
from addcomb.cli import emit_report, main
from addcomb.increment import Termination
from addcomb.io import read_set, write_set

from cli_matrix import make_inputs, matrix


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    return make_inputs(tmp_path_factory.mktemp("cli"))


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "structure" in capsys.readouterr().out
    assert main(["structure", "xv", "--help"]) == 0


def test_usage_errors(tmp_path, capsys):
    assert main(["count", "--set", str(tmp_path / "missing.txt")]) == 2
    assert main(["count", "--bogus"]) == 2
    assert main(["bohr", "--N", "101", "--freqs", "1", "--radius", "1", "--threads", "0"]) == 2
    (tmp_path / "bad.txt").write_text("not a header\n")
    assert main(["count", "--set", str(tmp_path / "bad.txt")]) == 2
    assert "error" in capsys.readouterr().err


def test_behrend_json(tmp_path):
    code, text = run(["construct", "behrend", "--d", "2", "--n", "2", "--set-out", str(tmp_path / "w.txt")], tmp_path)
    rep = json.loads(text)
    assert code == 0 and rep["verified"] is True and rep["size"] == len(rep["elements"])
    W = read_set(tmp_path / "w.txt")
    assert W.size == rep["size"]


def test_emit_report_plain_values():
    rep = json.loads(emit_report({"a": Fraction(1, 5), "b": 0.1 + 0.2, "c": Termination.BUDGET,
                                  "d": float("inf"), "e": [Fraction(1, 2)]}))
    assert rep == {"a": "1/5", "b": 0.3, "c": "BUDGET", "d": "inf", "e": ["1/2"]}
    assert list(rep) == ["a", "b", "c", "d", "e"]


def test_empty_trace_report(tmp_path):
    g = GroupSpec.vector_space(5, 2)
    write_set(GroupSet.from_elements(g, [0]), tmp_path / "a.txt")
    code, text = run(["iterate", "--set", str(tmp_path / "a.txt"), "--target", "30"], tmp_path)
    rep = json.loads(text)
    assert code == 0 and rep["steps"] == [] and rep["termination"] == "DENSITY_CAP"


def test_csv_header_matches_json(tmp_path, inputs):
    argv = ["count", "--set", inputs["z101_a"]]
    _, js = run(argv, tmp_path, "a.json")
    _, cs = run(argv + ["--format", "csv"], tmp_path, "a.csv")
    rows = list(csv.reader(io.StringIO(cs)))
    assert rows[0] == list(json.loads(js)) and len(rows) == 2
    assert rows[1][rows[0].index("equation")] == "[1,1,1,-3]"


def test_global_flags_either_side(tmp_path, inputs):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["--seed", "3", "--out", str(a), "search", "--N", "20", "--mode", "greedy"]) == 0
    assert main(["search", "--N", "20", "--mode", "greedy", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_incomplete_exit_code(tmp_path):
    code, text = run(["search", "--N", "30", "--budget", "10"], tmp_path)
    assert code == 4 and json.loads(text)["complete"] is False


def test_non_free_iterate_is_verification_error(tmp_path, inputs):
    code, _ = run(["iterate", "--set", inputs["f53_line"]], tmp_path)
    assert code == 3


def test_matrix_runs(tmp_path, inputs):
    for i, argv in enumerate(matrix(inputs)):
        code, text = run(argv, tmp_path, f"m{i}.json")
        assert code == 0, argv
        json.loads(text)


def test_module_entry_point(inputs):
    res = subprocess.run([sys.executable, "-m", "addcomb", "count", "--set", inputs["z101_a"]],
                         capture_output=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["total"] == 91
