import catalog
import rules as R
from cutelim import applicable_steps, apply_step
from expgraph import build_exp_graph, enumerate_flows, flow_residues, tree_rank
from proofgraph import to_tree
from syntax import Bang, DualVar, Quest, StepLimitExceeded, Var, negate

import pytest

X, Y = Var("X"), Var("Y")
NX = DualVar("X")


def _absorbed():
    # X, ?~X with the ?~X made by one absorption over a weakening
    return R.absorb(R.weaken(R.ax(NX, X), Quest(NX)), 0, 2)


def _box():
    return to_tree(catalog.nwb_over_axioms())


def test_absorption_gives_rank_one():
    eg = build_exp_graph(catalog.d_abs())
    assert eg.rank() == 1
    assert tree_rank(catalog.d_abs()) == 1
    assert eg.nwbs() == []


def test_single_flow_through_the_absorption():
    (flow,) = enumerate_flows(build_exp_graph(catalog.d_abs()))
    assert flow.b_count == 1
    assert len(flow.nodes) == 5
    assert not flow.balanced
    assert flow.to_json()["b"] == 1


def test_boxes_unroll_to_the_horizon():
    eg = build_exp_graph(catalog.nwb_over_axioms(), horizon=2)
    assert eg.nwbs() == [()]
    assert eg.rank() == 0
    assert eg.of_class("p")
    assert any(node.frontier for node in eg.nodes.values())
    assert eg.to_dot().startswith("digraph exponential {")


def test_flow_cap():
    eg = build_exp_graph(catalog.nwb_over_axioms(), horizon=2)
    assert enumerate_flows(eg)
    with pytest.raises(StepLimitExceeded):
        enumerate_flows(eg, cap=0)


@pytest.mark.parametrize("kind, make", [
    ("cp-b", lambda: R.cut(_box(), _absorbed(), 1, 1)),
    ("cp-w", lambda: R.cut(_box(), R.weaken(R.ax(Y), Quest(NX)), 1, 2)),
])
def test_exponential_steps_never_grow_flows(kind, make):
    tree = make()
    (step,) = applicable_steps(tree)
    assert step.kind == kind
    flows = [f for f in enumerate_flows(build_exp_graph(tree)) if not f.truncated]
    assert any(f.balanced for f in flows)
    for flow in flows:
        residues = flow_residues(tree, step, flow)
        assert all(r.b_count <= flow.b_count for r in residues)
        if flow.balanced:
            assert len(residues) <= 1
            assert all(r.balanced for r in residues)


def test_absorption_step_keeps_one_balanced_residue_per_flow():
    tree = R.cut(_box(), _absorbed(), 1, 1)
    (step,) = applicable_steps(tree)
    balanced = [f for f in enumerate_flows(build_exp_graph(tree)) if f.balanced and not f.truncated]
    assert len(balanced) >= 2
    for flow in balanced:
        (residue,) = flow_residues(tree, step, flow)
        assert residue.balanced


def test_frontier_flow_loses_its_residue_when_the_box_is_erased():
    tree = R.cut(_box(), R.weaken(R.ax(Y), Quest(NX)), 1, 2)
    (step,) = applicable_steps(tree)
    eg = build_exp_graph(tree)
    from_frontier = [f for f in enumerate_flows(eg) if eg.nodes[f.nodes[0]].frontier]
    assert from_frontier
    assert all(flow_residues(tree, step, f) == [] for f in from_frontier)


def test_multiplicative_step_joins_two_flows():
    bang = Bang(X)
    left = R.par(R.bot(R.ax(negate(bang), bang)), 1, 2)
    right = R.tensor(_absorbed(), R.one(), 1, 0)
    tree = R.label(R.cut(left, right, 1, 1))
    (step,) = applicable_steps(tree)
    assert step.kind == "mult-tensor-par"

    before = build_exp_graph(tree, relabel=False)
    flows = enumerate_flows(before)
    assert sorted(f.b_count for f in flows) == [0, 1]
    crossed = [{before.nodes[n].key for n in f.nodes} for f in flows]
    assert not crossed[0] & crossed[1]

    after = build_exp_graph(apply_step(tree, step), relabel=False)
    (joined,) = enumerate_flows(after)
    reached = {after.nodes[n].key for n in joined.nodes}
    assert all(keys & reached for keys in crossed)
    assert joined.b_count == sum(f.b_count for f in flows)
