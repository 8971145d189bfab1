import random

import pytest

import catalog
import rules as R
from cutelim import applicable_steps, apply_step
from generators import random_cut
from representation import bool_proof
from semantics import (DIFFERENT, EMPTY, EQUAL, STAR, Multiset, Pair, Universe, check_all_steps, check_step, contains,
                       in_sequent, interp_derivation, interp_formula, stabilize, stratum, value_from_json,
                       value_level, value_to_json)
from syntax import ONE, Bang, DualVar, ParseError, PreconditionError, Tensor, Var

X, NX = Var("X"), DualVar("X")


def test_universe_strata():
    assert stratum(0, 2) == (STAR,)
    assert len(stratum(1, 2)) == 5
    assert EMPTY in stratum(1, 2)
    assert value_level(Pair(STAR, Multiset.of([STAR]))) == 2
    with pytest.raises(PreconditionError):
        Universe(level=-1)


def test_formula_interpretation():
    assert interp_formula(ONE).points == frozenset({STAR})
    assert len(interp_formula(Bang(ONE), Universe(multiset_cap=2))) == 3
    assert len(interp_formula(X)) == 5
    assert contains(Tensor(ONE, ONE), Pair(STAR, STAR))
    assert not contains(Bang(ONE), Multiset.of([STAR] * 3))
    assert in_sequent((STAR, STAR), [ONE, ONE])
    assert not in_sequent((STAR,), [ONE, ONE])


def test_value_json():
    v = Pair(STAR, Multiset.of([STAR, EMPTY]))
    assert value_from_json(value_to_json(v)) == v
    with pytest.raises(ParseError):
        value_from_json({"bag": []})


def test_approximants_start_empty():
    assert len(interp_derivation(R.one(), 0)) == 0
    assert interp_derivation(R.one(), 1).points == frozenset({(STAR,)})
    diagonal = interp_derivation(R.ax(NX, X), 1)
    assert len(diagonal) == 5
    assert all(a == b for a, b in diagonal.points)


def test_self_cut_is_empty_forever():
    result = stabilize(catalog.d_bot())
    assert result.stable_at == 0
    assert len(result.final) == 0
    assert all(size == 0 for size in result.sizes)


def test_boolean_shapes():
    one = interp_derivation(bool_proof(1), 10)
    zero = interp_derivation(bool_proof(0), 10)
    assert len(one) == len(zero) == 25
    assert all(v.left == v.right for (v,) in one.points)
    assert all(v.left == Pair(v.right.right, v.right.left) for (v,) in zero.points)
    conclusion = bool_proof(1).conclusion
    assert all(in_sequent(p, conclusion) for p in one.points)


def test_axiom_cut_step_is_invariant():
    tree = R.cut(R.ax(NX, X), R.ax(NX, X), 1, 0)
    verdicts = check_all_steps(tree)
    assert [v.verdict for v in verdicts] == [EQUAL]
    assert verdicts[0].to_json()["step"]["kind"] == "mult-ax"


def test_hundred_single_steps_keep_the_interpretation():
    rng = random.Random(23)
    verdicts, kinds = [], set()
    for _ in range(300):
        tree = random_cut(rng, formula_depth=1)
        while len(verdicts) < 400:
            steps = applicable_steps(tree)
            if not steps:
                break
            result = check_step(tree, steps[0])
            verdicts.append(result.verdict)
            if result.verdict == EQUAL:
                kinds.add(steps[0].kind)
            tree = apply_step(tree, steps[0])
        if verdicts.count(EQUAL) >= 100:
            break
    assert DIFFERENT not in verdicts
    assert verdicts.count(EQUAL) >= 100
    assert "mult-ax" in kinds
    assert len(kinds) >= 2
