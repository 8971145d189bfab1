import pytest

import catalog
import rules as R
from cutelim import (CutStep, CutTagger, applicable_steps, apply_step, blocked_cuts, cut_kind, cut_residue,
                     find_tag, reduce_cut)
from normalizer import normalize_finite
from proofgraph import to_tree
from syntax import DualVar, Exists, Par, Quest, StepError, Var, negate, substitute

X, Y = Var("X"), Var("Y")
NX = DualVar("X")


def test_axiom_cut():
    c = R.cut(R.ax(X), R.ax(X), 1, 0)
    assert cut_kind(c) == "mult-ax"
    reduct, kind = reduce_cut(c)
    assert kind == "mult-ax"
    assert reduct == R.ax(X)


def test_tensor_par_cut_keeps_the_conclusion():
    left = R.par(R.ax(X), 0, 1)
    right = R.tensor(R.ax(X), R.ax(X), 1, 0)
    c = R.cut(left, right, 0, 2)
    assert cut_kind(c) == "mult-tensor-par"
    reduct, _ = reduce_cut(c)
    assert reduct.conclusion == c.conclusion
    assert reduct.rule == "cut"


def test_one_bot_cut():
    c = R.cut(R.one(), R.bot(R.ax(X)), 0, 2)
    assert cut_kind(c) == "mult-one-bot"
    assert reduce_cut(c)[0] == R.ax(X)


def test_commutation_when_the_cut_formula_is_not_principal():
    c = R.cut(R.bot(R.ax(X)), R.bot(R.ax(NX, X)), 0, 0)
    assert cut_kind(c) == "comm-1"
    reduct, _ = reduce_cut(c)
    assert reduct.conclusion == c.conclusion
    assert [s.kind for s in applicable_steps(reduct)] == ["mult-ax"]


def test_promotion_against_weakening():
    c = R.cut(R.fp(R.ax(X)), R.weaken(R.ax(Y), Quest(X)), 1, 2)
    assert cut_kind(c) == "fp-w"
    reduct, _ = reduce_cut(c)
    assert reduct.conclusion == c.conclusion
    assert R.is_cut_free(reduct)


def test_box_cuts_are_bordered():
    box = to_tree(catalog.nwb_over_axioms())
    c = R.cut(box, R.weaken(R.ax(Y), Quest(NX)), 1, 2)
    (step,) = applicable_steps(c)
    assert step.kind == "cp-w"
    assert step.bordered
    assert step.shallow
    assert R.is_cut_free(apply_step(c, step))


def test_steps_are_listed_lowest_first():
    inner = R.cut(R.ax(X), R.ax(X), 1, 0)
    outer = R.cut(inner, R.ax(X), 1, 0)
    steps = applicable_steps(outer)
    assert [s.address for s in steps] == [(), (1,)]
    assert steps[0].to_json()["kind"] == "mult-ax"


def test_stale_steps_are_rejected():
    c = R.cut(R.ax(X), R.ax(X), 1, 0)
    with pytest.raises(StepError):
        apply_step(c, CutStep("mult-tensor-par", ()))
    with pytest.raises(StepError):
        apply_step(c, CutStep("mult-ax", (3,)))


def test_hypotheses_block_cuts():
    c = R.cut(R.hyp([X, NX]), R.hyp([X, NX]), 1, 0)
    assert applicable_steps(c) == []
    assert blocked_cuts(c) == [()]
    with pytest.raises(StepError):
        reduce_cut(c)


def test_tags_follow_residues():
    exponential = R.cut(R.fp(R.ax(X)), R.weaken(R.ax(Y), Quest(X)), 1, 2)
    tree = R.cut(exponential, R.ax(Y), 2, 0)
    tagged = CutTagger()(tree)
    assert find_tag(tagged, "c1") is not None
    step = applicable_steps(tree)[0]
    assert step.address == ()
    assert cut_residue(tree, step, (1,)) is not None


def _absorbed(a):
    # a proof of ~a, ?a whose ?a comes from one absorption
    return R.absorb(R.weaken(R.ax(a), Quest(a)), 0, 2)


def _box():
    return to_tree(catalog.nwb_over_axioms())


@pytest.mark.parametrize("kind, make, after", [
    ("fp-b", lambda: R.cut(R.fp(R.ax(X)), _absorbed(X), 1, 1), {"fp-w", "mult-ax"}),
    ("nu-b", lambda: R.cut(catalog.identity_stream(), _absorbed(NX), 1, 1), {"nu-w", "mult-ax"}),
    ("cp-b", lambda: R.cut(_box(), _absorbed(NX), 1, 1), {"mult-ax"}),
])
def test_promotion_against_absorption(kind, make, after):
    c = make()
    assert cut_kind(c) == kind
    reduct, _ = reduce_cut(c)
    assert reduct.conclusion == c.conclusion
    # the promoted context is absorbed once more
    assert R.count_rules(reduct, {"b"}) == 1
    assert {s.kind for s in applicable_steps(reduct)} == after


def test_fp_absorption_normalizes():
    c = R.cut(R.fp(R.ax(X)), _absorbed(X), 1, 1)
    tree, trace = normalize_finite(c)
    assert R.is_cut_free(tree)
    assert tree.conclusion == c.conclusion
    assert [s.kind for s in trace.steps][0] == "fp-b"


def test_boxes_fuse_into_one_box():
    c = R.cut(_box(), _box(), 1, 0)
    assert cut_kind(c) == "cp-cp"
    reduct, _ = reduce_cut(c)
    assert reduct.conclusion == c.conclusion
    assert R.count_rules(reduct, {"box"}) == 1
    assert not R.is_cut_free(reduct)


@pytest.mark.parametrize("left, right", [
    (catalog.identity_stream, catalog.identity_stream),
    (lambda: R.fp(R.ax(NX, X)), catalog.identity_stream),
    (catalog.identity_stream, lambda: R.fp(R.ax(NX, X))),
])
def test_promotions_fuse_into_one_nu(left, right):
    c = R.cut(left(), right(), 1, 0)
    assert cut_kind(c) == "nu-nu"
    reduct, kind = reduce_cut(c)
    assert kind == "nu-nu"
    assert reduct.conclusion == c.conclusion
    assert R.count_rules(reduct, {"nu"}) == 1
    assert R.count_rules(reduct, {"fp"}) == 0


def test_quantifier_cut_instantiates_the_eigenvariable():
    body = Par(X, NX)
    universal = R.forall(R.par(R.ax(X), 0, 1), 0, "X")
    instance = substitute(negate(body), "X", Y)
    witness = R.exists(R.ax(negate(instance), instance), 1, Exists("X", negate(body)), Y)
    c = R.cut(universal, witness, 0, 1)
    assert cut_kind(c) == "so-forall-exists"
    reduct, _ = reduce_cut(c)
    assert reduct.conclusion == c.conclusion
    assert R.count_rules(reduct, {"forall", "exists"}) == 0
    tree, _ = normalize_finite(c)
    assert R.is_cut_free(tree)
    assert tree.conclusion == (negate(instance),)
