import pytest

from rules import (absorb, ax, box, box_call_address, count_rules, cp, cut, ex, exists, forall, fp, hyp,
                   is_cut_free, one, par, parent_map, subproof, subst_proof, tensor, unfold_box, walk, weaken,
                   weights)
from selector import Selector
from syntax import BOT, ONE, Bang, DualVar, Exists, Par, Quest, Tensor, ValidationError, Var, parse_formula

X, Y = Var("X"), Var("Y")
NX, NY = DualVar("X"), DualVar("Y")


def test_axiom_and_multiplicatives():
    assert ax(X).conclusion == (X, NX)
    with pytest.raises(ValidationError):
        ax(X, Y)
    assert tensor(ax(X), ax(Y), 1, 1).conclusion == (X, Y, Tensor(NX, NY))
    assert par(ax(X), 0, 1).conclusion == (Par(X, NX),)
    assert cut(ax(X), ax(X), 1, 0).conclusion == (X, NX)
    with pytest.raises(ValidationError):
        cut(ax(X), ax(Y), 1, 0)


def test_exponential_rules():
    assert fp(ax(X)).conclusion == (Quest(X), Bang(NX))
    assert absorb(weaken(ax(X), Quest(X)), 0, 2).conclusion == (NX, Quest(X))
    with pytest.raises(ValidationError):
        weaken(ax(X), X)
    assert cp(ax(X), fp(ax(X))).conclusion == (Quest(X), Bang(NX))
    with pytest.raises(ValidationError):
        cp(ax(X), fp(ax(Y)))


def test_quantifier_rules():
    assert forall(par(ax(X), 0, 1), 0, "X").conclusion == (parse_formula("all X. X | ~X"),)
    with pytest.raises(ValidationError):
        forall(ax(X), 0, "X")
    assert exists(ax(ONE), 0, Exists("X", X), ONE).conclusion == (BOT, Exists("X", X))
    with pytest.raises(ValidationError):
        exists(ax(Bang(ONE)), 0, Exists("X", X), Bang(ONE))


def test_exchange_composes_and_vanishes():
    p = ax(X)
    assert ex(p, [0, 1]) is p
    swapped = ex(p, [1, 0])
    assert swapped.conclusion == (NX, X)
    assert ex(swapped, [1, 0]) is p
    assert swapped.size == p.size


def test_structural_equality():
    assert ax(X) == ax(X)
    assert hash(tensor(ax(X), one(), 0, 0)) == hash(tensor(ax(X), one(), 0, 0))
    assert ax(X) != ax(Y)


def test_box_unfolds_along_selector():
    b = box([ax(X), hyp([X, NX])], Selector.periodic(2, period=[0, 1]))
    assert b.conclusion == (Quest(X), Bang(NX))
    unfolded = unfold_box(b)
    assert unfolded.rule == "cp"
    assert unfolded.premises[1].selector.at(0) == 1
    assert subproof(b, (1,)).rule == "ax"
    assert subproof(b, (2, 1)).rule == "hyp"
    assert subproof(b, (2, 2, 1)).rule == "ax"
    assert box_call_address(b, 1) == (2, 1)
    with pytest.raises(ValidationError):
        box([ax(X)], Selector.periodic(2, period=[0, 1]))


def test_walk_can_skip_calls():
    p = cp(ax(X), fp(ax(X)))
    assert [a for a, _ in walk(p)] == [(), (1,), (2,), (2, 1)]
    assert [a for a, _ in walk(p, into_calls=False)] == [(), (2,), (2, 1)]


def test_counts_and_weights():
    p = cut(fp(ax(X)), weaken(ax(X), Quest(X)), 1, 2)
    assert not is_cut_free(p)
    assert count_rules(p, {"ax"}) == 2
    assert weights(fp(ax(X))) == {"S": 1, "C": 1, "M": 1}


def test_parent_map_for_tensor():
    premises = [(X, NX), (Y, NY)]
    assert parent_map("tensor", (1, 1), premises) == [[(0, 0)], [(1, 0)], [(0, 1), (1, 1)]]


def test_type_substitution():
    assert subst_proof(ax(X), "X", ONE).conclusion == (ONE, BOT)
