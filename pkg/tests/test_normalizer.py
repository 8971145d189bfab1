import json

import pytest

import catalog
import rules as R
from criteria import tree_depth
from dagger import translate_dagger
from data_encodings import (AND, BOOL, FALSE, NOT, OR, TRUE, WEAKEN_BOOL, XOR, binary_function, encode_stream,
                            library_hints)
from data_encodings import decode_bool as decode_bool_term
from lambda_calculus import DISC, POP, App, LetPair, LetUnit, Variable, apply, beta_normalize
from normalizer import POSTPONED, eval_representation, normalize_finite, shallow_normalize
from proofgraph import to_tree
from representation import B, S, identity_proof, not_proof
from syntax import DualVar, PreconditionError, Quest, StepLimitExceeded, Var
from type_system import typecheck

X, Y = Var("X"), Var("Y")
NX = DualVar("X")


def _pop(stream, head, tail, body):
    return LetPair(App(POP, stream), head, tail, body)


def _drop(tail, body):
    return LetUnit(App(DISC, Variable(tail)), body)


# calls (FALSE, TRUE) read as TRUE, FALSE, TRUE, ...
ADVICE = encode_stream([1, 0])
FIRST = _pop(ADVICE, "h", "t", _drop("t", Variable("h")))
SECOND = _pop(ADVICE, "h", "t", LetUnit(App(WEAKEN_BOOL, Variable("h")),
                                        _pop(Variable("t"), "h2", "t2", _drop("t2", Variable("h2")))))
ADVICE_XOR = _pop(ADVICE, "h", "t", _pop(Variable("t"), "h2", "t2",
                                         _drop("t2", apply(XOR, Variable("h"), Variable("h2")))))

PROGRAMS = {
    "true": (TRUE, 1),
    "false": (FALSE, 0),
    "not": (App(NOT, TRUE), 0),
    "not-not": (App(NOT, App(NOT, FALSE)), 0),
    "and": (apply(AND, TRUE, FALSE), 0),
    "or": (apply(OR, FALSE, TRUE), 1),
    "xor": (apply(XOR, TRUE, TRUE), 0),
    "table-0110": (apply(binary_function("0110"), TRUE, FALSE), 1),
    "stream-head": (FIRST, 1),
    "stream-second": (SECOND, 0),
    "advice-xor": (ADVICE_XOR, 1),
}


def test_exhaustive_normalization_records_steps():
    tree, trace = normalize_finite(R.cut(R.ax(X), R.ax(X), 1, 0))
    assert tree == R.ax(X)
    assert trace.kinds() == {"mult-ax": 1}
    assert len(trace.steps) <= trace.cubic_bound
    assert trace.principal_only
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["kind"] == "mult-ax"


def test_random_policy_reaches_a_cut_free_form():
    left = R.par(R.ax(X), 0, 1)
    right = R.tensor(R.ax(X), R.ax(X), 1, 0)
    proof = R.cut(left, right, 0, 2)
    for seed in range(3):
        tree, trace = normalize_finite(proof, policy="random", seed=seed)
        assert R.is_cut_free(tree)
        assert tree.conclusion == proof.conclusion
        assert trace.to_json()["steps"] == len(trace.steps)


def test_step_limit():
    with pytest.raises(StepLimitExceeded) as info:
        normalize_finite(R.cut(R.ax(X), R.ax(X), 1, 0), max_steps=0)
    assert info.value.steps == 0


def test_exhaustive_strategy_rejects_coderivations():
    with pytest.raises(PreconditionError):
        normalize_finite(catalog.nwb_over_axioms())


def test_shallow_strategy_rejects_bang_conclusions():
    with pytest.raises(PreconditionError):
        shallow_normalize(catalog.nwb_over_axioms())


def test_shallow_strategy_reduces_bordered_cuts_in_phase_two():
    box = to_tree(catalog.nwb_over_axioms())
    proof = R.cut(box, R.weaken(R.ax(Y), Quest(NX)), 1, 2)
    tree, trace = shallow_normalize(proof, cross_check=True)
    assert R.is_cut_free(tree)
    assert tree.conclusion == proof.conclusion
    assert trace.steps[0].kind == "cp-w"
    assert trace.steps[0].phase == 2
    assert len(trace.rounds) == 2
    assert trace.rounds[0].cross_check is True
    assert trace.blocked == []


@pytest.mark.parametrize("bit", [0, 1])
def test_identity_on_booleans(bit):
    value, trace = eval_representation(identity_proof(B), [bit])
    assert value == bit
    assert trace.steps


@pytest.mark.parametrize("bit", [0, 1])
def test_negation(bit):
    value, _ = eval_representation(not_proof(), [bit], kind="bool")
    assert value == 1 - bit


def test_identity_on_strings_in_every_system():
    for system in ("pll2", "nupll2", "rpll", "wrpll"):
        value, _ = eval_representation(identity_proof(S), ["0110"], system)
        assert value == "0110"


def test_unknown_system():
    with pytest.raises(PreconditionError):
        eval_representation(identity_proof(B), [1], "lll")


def test_postponed_promotion_cuts_are_left_blocked():
    promotion = R.fp(R.ax(NX, X))
    proof = R.cut(promotion, promotion, 1, 0)
    tree, trace = normalize_finite(proof, postpone_promotions=True)
    assert tree == proof
    assert trace.steps == []
    assert trace.blocked == [()]
    _, eager = normalize_finite(proof)
    assert "fp-fp" in eager.kinds()


@pytest.mark.parametrize("name", sorted(PROGRAMS))
def test_programs_agree_by_beta_and_through_proofs(name):
    term, expected = PROGRAMS[name]
    assert decode_bool_term(beta_normalize(term)) == expected
    g = translate_dagger(typecheck(term, BOOL, hints=library_hints()))
    value, trace = eval_representation(g, [], "nupll2", kind="bool")
    assert value == expected
    assert not POSTPONED & set(trace.kinds())


@pytest.mark.parametrize("name", sorted(PROGRAMS))
def test_programs_agree_with_weakly_regular_promotions(name):
    term, expected = PROGRAMS[name]
    g = translate_dagger(typecheck(term, BOOL, hints=library_hints()))
    value, trace = eval_representation(g, [], "wrpll", kind="bool")
    assert value == expected
    assert trace.blocked == []


def _absorbing(k):
    # A_k, ?~X where ?~X absorbs k copies of ~X
    proof = R.absorb(R.weaken(R.ax(NX, X), Quest(NX)), 0, 2)
    for _ in range(k - 1):
        proof = R.absorb(R.tensor(R.ax(NX, X), proof, 1, 0), 0, 1)
    return proof


BOXED = [R.cut(to_tree(catalog.nwb_over_axioms()), _absorbing(k), 1, 1) for k in range(1, 21)] + [
    R.cut(to_tree(catalog.nwb_over_axioms()), R.weaken(R.ax(Y), Quest(NX)), 1, 2),
]


@pytest.mark.parametrize("proof", BOXED)
def test_shallow_strategy_takes_one_round_per_level(proof):
    depth = tree_depth(proof)
    tree, trace = shallow_normalize(proof, cross_check=True)
    assert R.is_cut_free(tree)
    assert R.count_rules(tree, {"hyp", "box", "cp"}) == 0
    assert tree.conclusion == proof.conclusion
    assert len(trace.rounds) == depth + 1
    for record in trace.rounds:
        assert record.cross_check is True
        if record.depth_before > 0:
            assert record.depth_after < record.depth_before
