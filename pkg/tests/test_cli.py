import json
import os

import pytest

import rules as R
from pll_toolkit import input_value, main
from proof_script import save_graph
from proofgraph import to_graph
from representation import S, identity_proof
from syntax import DualVar, ParseError, Var

X, NX = Var("X"), DualVar("X")


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_check_reports_the_offending_cycle(capsys):
    code, data = run_json(capsys, ["check", "catalog:nwb_over_axioms", "catalog:d_bot", "--jobs", "2"])
    assert code == 1
    assert data["passed"] == 1
    by_input = {r["input"]: r for r in data["results"]}
    assert by_input["catalog:nwb_over_axioms"]["ok"]
    assert by_input["catalog:d_bot"]["offending_cycle"] == ["v0"]


def test_normalize_writes_a_trace(tmp_path, capsys):
    path = str(tmp_path / "axcut.json")
    save_graph(to_graph(R.cut(R.ax(NX, X), R.ax(NX, X), 1, 0), cycles=False), path)
    trace = tmp_path / "steps.jsonl"
    code, data = run_json(capsys, ["normalize", path, "--trace", str(trace)])
    assert code == 0
    assert data["trace"]["steps"] == 1
    assert len(trace.read_text().splitlines()) == 1


def test_eval_identity_on_a_string(tmp_path, capsys):
    path = str(tmp_path / "identity.pll")
    save_graph(to_graph(identity_proof(S), cycles=False), path)
    code, data = run_json(capsys, ["eval", path, "--input", "0110", "--kind", "string"])
    assert code == 0
    assert data["value"] == "0110"


def test_term_commands(capsys):
    assert main(["beta", "(\\x. x) y"]) == 0
    assert capsys.readouterr().out.startswith("y")
    assert main(["typecheck", "\\x. x", "--type", "all X. X -o X"]) == 0
    assert "|-" in capsys.readouterr().out
    assert main(["decode", "bool", "\\p. let x*y = p in x * y"]) == 0
    assert capsys.readouterr().out.strip() == "1"
    code, data = run_json(capsys, ["encode", "nat", "2"])
    assert data["value"] == 2


def test_compile_poly(capsys):
    code, data = run_json(capsys, ["compile-poly", "1,2,3", "--at", "2"])
    assert code == 0
    assert data["runs"] == [{"at": 2, "value": 17, "expected": 17}]


def test_sem_stabilizes(capsys):
    assert main(["sem", "catalog:d_bot"]) == 0
    assert "stable from n = 0 with 0 points" in capsys.readouterr().out


def test_gen_then_check_skips_processed_inputs(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["gen", "--count", "3", "--seed", "1", "--output", str(corpus)]) == 0
    assert len(os.listdir(corpus)) == 3
    results = str(tmp_path / "results.json")
    _, first = run_json(capsys, ["check", str(corpus), "--results", results])
    assert len(first["results"]) == 3
    _, second = run_json(capsys, ["check", str(corpus), "--results", results])
    assert second["results"] == []


def test_argument_errors():
    with pytest.raises(SystemExit):
        main(["gen"])
    with pytest.raises(SystemExit):
        main(["measure", "catalog:d_abs", "--format", "dot"])
    with pytest.raises(SystemExit):
        main(["eval", "catalog:d_abs"])


def test_errors_are_reported_as_json(tmp_path, capsys):
    code, data = run_json(capsys, ["measure", str(tmp_path / "missing.pll")])
    assert code == 1
    assert data["error"] == "ParseError"


def test_input_values():
    assert input_value("n:5") == 5
    assert input_value("0110") == "0110"
    with pytest.raises(ParseError):
        input_value("n:x")
