"""End-to-end CLI behaviour: exit codes, file outputs, JSON payloads."""

import json

import pytest

from mtlkit.cli import main
from mtlkit.core import is_future_only
from mtlkit.syntax import parse_formula, parse_timed_word


@pytest.fixture
def files(tmp_path):
    def put(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return tmp_path, put


def test_parse_formula_file(files, capsys):
    _, put = files
    assert main(["parse", put("f.mtl", "F(a & P[1,2) b)")]) == 0
    out = capsys.readouterr().out
    assert "fragment U_I_S_np" in out


def test_parse_word_file_json(files, capsys):
    _, put = files
    path = put("w.tw", "{a}@0 {b}@1.5 // tail\n")
    assert main(["parse", path, "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload == {
        "kind": "word",
        "length": 2,
        "span": "3/2",
        "strict": True,
        "alphabet": ["a", "b"],
    }


def test_parse_error_is_usage(files, capsys):
    _, put = files
    assert main(["parse", put("bad.mtl", "a U[3,2] b")]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["parse", "/no/such/file.mtl"]) == 2


def test_eval_exit_codes(files, capsys):
    _, put = files
    f = put("f.mtl", "F a")
    w = put("w.tw", "{b}@0 {a}@1")
    assert main(["eval", f, w]) == 0
    assert capsys.readouterr().out.strip() == "true"
    assert main(["eval", put("g.mtl", "a & !b"), w, "--pos", "2"]) == 0
    capsys.readouterr()
    # the strict diamond has no witness at the last point
    assert main(["eval", f, w, "--pos", "2"]) == 1
    assert capsys.readouterr().out.strip() == "false"
    assert main(["eval", f, w, "--pos", "5"]) == 2


def test_usage_errors():
    assert main([]) == 2
    assert main(["reduce", "x.mtl"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["--help"]) == 0


@pytest.mark.parametrize("method", ["simple", "oversample"])
def test_reduce_writes_future_only_output(files, capsys, method):
    tmp, put = files
    f = put("f.mtl", "F(a & P[1,2) b)")
    out = str(tmp / f"red_{method}.mtl")
    assert main(["reduce", f, "--method", method, "--out", out]) == 0
    capsys.readouterr()
    red = parse_formula((tmp / f"red_{method}.mtl").read_text())
    assert is_future_only(red)
    manifest = (tmp / f"red_{method}.mtl.manifest").read_text().splitlines()
    assert manifest
    for line in manifest:
        name, role, owner = line.split("\t")
        assert name and role
    names = [line.split("\t")[0] for line in manifest]
    assert "w1" in names


def test_reduce_json_round_trips(files, capsys):
    _, put = files
    f = put("f.mtl", "F(a & P[0,2) b)")
    assert main(["reduce", f, "--method", "simple", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["future_only"] is True
    assert payload["fragment"] == "U_I_only"
    parse_formula(payload["formula"])
    assert {p["role"] for p in payload["fresh"]} >= {"witness", "since"}


def test_reduce_rejects_punctual(files, capsys):
    _, put = files
    assert main(["reduce", put("p.mtl", "F(a & P[1,1] b)"), "--method", "simple"]) == 2


def test_fuzz_records_and_exit(files, capsys):
    tmp, put = files
    f = put("f.mtl", "F(a & P[1,2) b)")
    rec = str(tmp / "rows.tsv")
    assert main(["fuzz", f, "--method", "simple", "--trials", "25",
                 "--seed", "3", "--records", rec]) == 0
    out = capsys.readouterr().out
    assert "trials per family: 25" in out
    rows = (tmp / "rows.tsv").read_text().splitlines()
    assert len(rows) == 50
    assert all(line.split("\t")[1] in ("A", "B") for line in rows)


def test_fuzz_flags_a_weakened_marking(files, capsys):
    _, put = files
    f = put("f.mtl", "F(a & P[1,2) b)")
    code = main(["fuzz", f, "--method", "simple", "--trials", "600",
                 "--seed", "11", "--drop", "mark_a"])
    assert code == 1
    assert "fail" in capsys.readouterr().out


def test_sat_model_and_unsat(files, capsys):
    _, put = files
    f = put("f.mtl", "F[1,1] a")
    assert main(["sat", f, "--grid", "1/2", "--horizon", "2"]) == 0
    model = parse_timed_word(capsys.readouterr().out.strip())
    assert model == parse_timed_word("{a}@0 {a}@1")
    assert main(["sat", put("u.mtl", "a & !a")]) == 1
    assert capsys.readouterr().out.strip() == "UNSAT at scale"


def test_size_output(files, capsys):
    _, put = files
    assert main(["size", put("f.mtl", "F(a & P[2,3) b)"), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["simple"]["modal"] == 101
    assert payload["oversampled"]["modal"] == 59


def test_vectors_cases_and_files(files, capsys):
    tmp, _ = files
    out_dir = str(tmp / "vec")
    assert main(["vectors", "--case", "i", "--n", "5", "--delta", "1/10",
                 "--kappa", "1/20", "--i", "3", "--out-dir", out_dir]) == 0
    assert "expected: true/false  ok" in capsys.readouterr().out
    phi = parse_formula((tmp / "vec" / "case_i.mtl").read_text())
    w1 = parse_timed_word((tmp / "vec" / "case_i_w1.tw").read_text())
    w2 = parse_timed_word((tmp / "vec" / "case_i_w2.tw").read_text())
    from mtlkit.semantics import satisfies

    assert satisfies(w1, phi) and not satisfies(w2, phi)
    assert main(["vectors", "--case", "ii", "--delta", "0.1", "--kappa", "0.05"]) == 0
    assert main(["vectors", "--case", "iii", "--n", "4", "--epsilon", "0.01"]) == 0
    capsys.readouterr()
    assert main(["vectors", "--case", "i"]) == 2
