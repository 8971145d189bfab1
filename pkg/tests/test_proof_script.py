import json

import pytest

import catalog
from proof_script import graph_to_script, load_graph, parse_script, save_graph
from proofgraph import FINITE, REGULAR, same_unfolding
from syntax import ParseError, parse_formula, parse_formulas

AXIOM_BOX = """
# the box of axioms, written with a back-edge
kind regular-coderivation
def v0 : ?~X, !X = cp(; a, v0)
def a = ax(~X)
root v0
"""


def test_back_edges_build_a_cycle():
    g = parse_script(AXIOM_BOX)
    assert g.kind == REGULAR
    assert g.vertices["a"].conclusion == tuple(parse_formulas("~X, X"))
    assert same_unfolding(g, catalog.nwb_over_axioms())


def test_root_defaults_to_last_definition_and_kind_is_inferred():
    g = parse_script("def a = ax(X)\ndef p = par(0, 1; a)\n")
    assert g.root == "p"
    assert g.kind == FINITE
    assert g.conclusion == (parse_formula("X | ~X"),)


def test_undeclared_back_reference_is_an_error():
    with pytest.raises(ParseError):
        parse_script("def v0 = cp(; a, v0)\ndef a = ax(~X)\n")


def test_unknown_premise_and_syntax_errors():
    with pytest.raises(ParseError):
        parse_script("def p = par(0, 1; missing)\n")
    with pytest.raises(ParseError) as info:
        parse_script("def a = ax(X\n")
    assert info.value.line is not None
    with pytest.raises(ParseError):
        parse_script("# nothing here\n")


def test_selector_table_from_file(tmp_path):
    (tmp_path / "t.json").write_text(json.dumps([0, 0, 0]))
    text = 'kind weakly-regular\ndef a = ax(~X)\ndef s = box(selector table="t.json"; a)\n'
    g = parse_script(text, str(tmp_path))
    assert g.vertices["s"].data[0].table == (0, 0, 0)
    with pytest.raises(ParseError):
        parse_script(text, str(tmp_path / "elsewhere"))


@pytest.mark.parametrize("factory", [catalog.nwb_over_axioms, catalog.bit_stream, catalog.d_bot])
def test_scripts_reproduce_the_graph(factory):
    g = factory()
    again = parse_script(graph_to_script(g))
    assert again.kind == g.kind
    assert same_unfolding(again, g)


@pytest.mark.parametrize("suffix", [".pll", ".json"])
def test_save_and_load(tmp_path, suffix):
    g = catalog.nonprogressing()
    path = str(tmp_path / f"proof{suffix}")
    save_graph(g, path)
    assert same_unfolding(load_graph(path), g)


def test_load_errors(tmp_path):
    with pytest.raises(ParseError):
        load_graph(str(tmp_path / "absent.pll"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ParseError):
        load_graph(str(broken))
