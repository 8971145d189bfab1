import pytest

import catalog
import rules as R
from proofgraph import (FINITE, OPEN, REGULAR, WEAKLY_REGULAR, ProofGraph, RuleApp, approximates, collapse,
                        expand_fp, expand_nu, graft, graph_from_json, graph_to_dot, graph_to_json, infer_kind,
                        prune, require_valid, same_unfolding, subgraph, to_graph, to_tree, unfold, validate)
from syntax import Bang, DualVar, PreconditionError, Quest, ValidationError, Var

X, NX = Var("X"), DualVar("X")


@pytest.mark.parametrize("factory", [catalog.d_bot, catalog.nwb_over_axioms, catalog.nonprogressing,
                                     catalog.bit_stream, catalog.bit_box])
def test_catalog_graphs_validate(factory):
    report = validate(factory())
    assert report.valid, report.to_json()


def test_validation_reports_bad_conclusions_and_cycles():
    bad = ProofGraph({"v0": RuleApp("ax", (X, X), (), (X, X))}, "v0")
    report = validate(bad)
    assert not report.valid
    assert report.to_json()["violations"][0]["vertex"] == "v0"

    cyclic = catalog.d_bot()
    cyclic.kind = FINITE
    assert not validate(cyclic).valid
    with pytest.raises(ValidationError):
        require_valid(cyclic)


def test_kind_inference():
    assert to_graph(R.ax(X)).kind == FINITE
    assert infer_kind(catalog.nwb_over_axioms()) == REGULAR
    assert to_graph(R.hyp([X])).kind == OPEN


def test_unfolding_follows_back_edges():
    g = catalog.nwb_over_axioms()
    assert unfold(g, (2, 2, 2)).rule == "cp"
    assert unfold(g, (2, 2, 1)).rule == "ax"
    with pytest.raises(ValidationError):
        unfold(g, (1, 1))


def test_expand_fp_makes_self_loops():
    g = expand_fp(to_graph(R.fp(R.ax(NX, X))))
    assert g.kind == REGULAR
    root = g.vertices[g.root]
    assert root.rule == "cp"
    assert root.premises[1] == g.root
    assert same_unfolding(g, catalog.nwb_over_axioms())
    with pytest.raises(PreconditionError):
        expand_fp(catalog.nwb_over_axioms())


def test_expand_nu_turns_nu_into_box():
    g = expand_nu(catalog.bit_stream())
    assert g.kind == WEAKLY_REGULAR
    assert g.vertices[g.root].rule == "box"
    assert g.conclusion == catalog.bit_stream().conclusion


def test_prune_and_graft_restore_the_coderivation():
    g = catalog.nwb_over_axioms()
    pruned = prune(g, [(2,)])
    assert pruned.open
    assert pruned.kind == OPEN
    assert approximates(pruned, g)
    assert not approximates(g, pruned)
    restored = graft(pruned, {(2,): g})
    assert same_unfolding(restored, g)
    with pytest.raises(ValidationError):
        prune(g, [(2,), (2, 1)])


def test_subgraph_and_collapse():
    g = catalog.nwb_over_axioms()
    assert subgraph(g, (2, 1)).vertices[subgraph(g, (2, 1)).root].rule == "ax"
    doubled = ProofGraph({
        "v0": RuleApp("cp", (Quest(NX), Bang(X)), ("a", "v1")),
        "v1": RuleApp("cp", (Quest(NX), Bang(X)), ("b", "v0")),
        "a": RuleApp("ax", (NX, X), (), (NX, X)),
        "b": RuleApp("ax", (NX, X), (), (NX, X)),
    }, "v0", REGULAR)
    collapsed = collapse(doubled)
    assert len(collapsed.vertices) == 2
    assert same_unfolding(collapsed, g)


def test_tree_conversion():
    tree = to_tree(catalog.nwb_over_axioms())
    assert tree.rule == "box"
    assert tree.selector.take(3) == [0, 0, 0]
    assert same_unfolding(to_graph(tree), catalog.nwb_over_axioms())
    with pytest.raises(PreconditionError):
        to_tree(catalog.d_bot())


def test_json_and_dot_export():
    g = to_graph(catalog.d_abs())
    data = graph_to_json(g)
    assert data["root"] == g.root
    assert all("parents" in v for v in data["vertices"].values())
    assert same_unfolding(graph_from_json(data), g)
    dot = graph_to_dot(catalog.d_bot())
    assert dot.startswith("digraph proof {")
    assert "color=red" in dot
