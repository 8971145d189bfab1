import json
import os

import pytest

from corpus_finder import expand_inputs, find_proof_files, output_path_for
from io_handler import (load_inputs, load_oracle_table, load_results, read_json, should_process, update_results,
                        write_json)
from syntax import ParseError


def test_json_round_trip(tmp_path):
    path = tmp_path / "out" / "report.json"
    write_json({"a": [1, 2]}, str(path))
    assert read_json(str(path)) == {"a": [1, 2]}
    bad = tmp_path / "bad.json"
    bad.write_text("[1,")
    with pytest.raises(ParseError):
        read_json(str(bad))


def test_oracle_tables_and_inputs(tmp_path):
    table = tmp_path / "table.json"
    table.write_text(json.dumps({"table": [0, 1, 1]}))
    assert load_oracle_table(str(table)) == [0, 1, 1]
    table.write_text(json.dumps(["x"]))
    with pytest.raises(ParseError):
        load_oracle_table(str(table))
    lines = tmp_path / "inputs.txt"
    lines.write_text("0110\n\nn:3\n")
    assert load_inputs(str(lines)) == ["0110", "n:3"]


def test_results_tracking(tmp_path):
    proof = tmp_path / "a.pll"
    proof.write_text("root = one")
    results_file = str(tmp_path / "results.json")
    assert load_results(results_file) == {}
    update_results(results_file, str(proof), "check", {"valid": True})
    results = load_results(results_file)
    assert not should_process(str(proof), "check", results)
    assert should_process(str(proof), "normalize", results)
    assert should_process(str(proof), "check", results, force=True)


def test_finding_proof_files(tmp_path):
    nested = tmp_path / "corpus" / "deep"
    nested.mkdir(parents=True)
    (nested / "b.pll").write_text("")
    (tmp_path / "corpus" / "a.json").write_text("{}")
    (tmp_path / "corpus" / "notes.txt").write_text("")
    found = find_proof_files(str(tmp_path / "corpus"))
    assert [os.path.basename(f) for f in found] == ["a.json", "b.pll"]
    assert len(expand_inputs([str(tmp_path / "corpus"), str(tmp_path / "missing.pll")])) == 2
    target = output_path_for(str(nested / "b.pll"), str(tmp_path / "corpus"), str(tmp_path / "out"), ".dot")
    assert target == os.path.join(str(tmp_path / "out"), "deep", "b.dot")
