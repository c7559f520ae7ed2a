import json

from localchar.cli import main
from localchar.reporting import canonical_json


def run(args):
    return main(args)


def test_construct_pass(tmp_path):
    out = tmp_path / "c.json"
    assert run(["construct", "--p", "7", "--N", "5", "--precision", "12",
                "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "pass"
    assert rep["results"][0]["tower_degrees"] == [1, 5]


def test_construct_even_requires_ell():
    assert run(["construct", "--p", "11", "--N", "6"]) == 2


def test_verify_rank_one_small(tmp_path):
    out = tmp_path / "v.json"
    code = run(["verify", "--level", "r1", "--p", "7", "--N", "5",
                "--precision", "12", "--conductor-bound", "1",
                "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["results"][0]["rank_one"]["twists"] == 36


def test_verify_mutated_fails(tmp_path):
    out = tmp_path / "m.json"
    code = run(["verify", "--level", "equ6", "--p", "11", "--N", "7",
                "--precision", "28", "--conductor-bound", "3", "--r", "2",
                "--mutate", "--out", str(out)])
    assert code == 1
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "fail"


def test_epsilon_command_for_explicit_character(tmp_path):
    out = tmp_path / "e.json"
    code = run(["epsilon", "--p", "7", "--char-field", "F", "--char-t", "2",
                "--char-gamma=-2:3,-1:1", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    entry = rep["results"][0]
    assert entry["conductor"] == 3
    assert "closed_form" in entry and "oracle" in entry


def test_factorize_command(tmp_path):
    out = tmp_path / "f.json"
    code = run(["factorize", "--p", "7", "--N", "5", "--char-field", "E",
                "--char-gamma=-8:1", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["results"][0]["tower_degrees"] == [5]
    # inadmissible input is a structured configuration error
    assert run(["factorize", "--p", "7", "--N", "5", "--char-field", "E",
                "--char-gamma=-5:1"]) == 2


def test_selftest_command():
    assert run(["selftest", "--p", "7"]) == 0


def test_config_file_and_byte_stable_reports(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("p = 7\nN = 5\nprecision = 12\nconductor_bound = 1\n")
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    assert run(["verify", "--config", str(cfgfile), "--out", str(out1)]) == 0
    assert run(["verify", "--config", str(cfgfile), "--out", str(out2)]) == 0
    a = canonical_json(json.loads(out1.read_text()))
    b = canonical_json(json.loads(out2.read_text()))
    assert a == b


def test_search_bound_zero_returns_none(tmp_path):
    out = tmp_path / "s.json"
    code = run(["search", "--p", "7", "--N", "5", "--precision", "12",
                "--r", "2", "--conductor-bound", "0", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["results"][0]["search"]["found"] is None
