import pytest

from syntax import (BOT, ONE, Bang, DualVar, Exists, Forall, Par, ParseError, Quest, Tensor, Var,
                    alpha_eq, formula_from_json, formula_to_json, free_vars, is_dual, negate,
                    parse_formula, parse_formulas, parse_sequent, render, substitute)

X, Y = Var("X"), Var("Y")


def test_negation_is_involutive_and_de_morgan():
    f = Tensor(Bang(X), Quest(Par(X, DualVar("Y"))))
    assert negate(negate(f)) == f
    assert negate(Tensor(X, Y)) == Par(DualVar("X"), DualVar("Y"))
    assert negate(ONE) == BOT
    assert negate(Forall("X", X)) == Exists("X", DualVar("X"))


def test_parse_precedence_and_lolli():
    assert parse_formula("X * Y | X") == Par(Tensor(X, Y), X)
    assert parse_formula("X -o Y") == Par(DualVar("X"), Y)
    assert parse_formula("~(X * Y)") == Par(DualVar("X"), DualVar("Y"))
    assert parse_formula("all X. X -o X") == Forall("X", Par(DualVar("X"), X))
    assert parse_formula("!?1") == Bang(Quest(ONE))


def test_render_reparses_to_same_formula():
    for text in ("all X. (X -o X) -o X -o X", "!(X * Y) | ?~X", "ex Y. bot * (1 | Y)"):
        f = parse_formula(text)
        assert parse_formula(render(f)) == f


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_formula("X $ Y")
    assert info.value.line == 1
    assert info.value.kind == "parse"
    with pytest.raises(ParseError):
        parse_formula("X *")


def test_sequents():
    assert parse_formulas("") == []
    assert parse_formulas("X, ~X") == [X, DualVar("X")]
    seq = parse_sequent("X, Y, 1")
    assert len(seq) == 3
    assert len({o.oid for o in seq.occurrences}) == 3
    assert render(seq) == "X, Y, 1"


def test_substitution_avoids_capture():
    f = Forall("Y", Tensor(X, Y))
    result = substitute(f, "X", Y)
    assert isinstance(result, Forall)
    assert result.var != "Y"
    assert result.body == Tensor(Y, Var(result.var))
    assert substitute(Par(X, DualVar("X")), "X", ONE) == Par(ONE, BOT)


def test_alpha_equivalence_and_duality():
    assert alpha_eq(Forall("X", X), Forall("Y", Y))
    assert not alpha_eq(Forall("X", X), Forall("X", Y))
    assert is_dual(Tensor(X, Y), parse_formula("~X | ~Y"))
    assert free_vars(parse_formula("all X. X * Y")) == {"Y"}


def test_json_export():
    f = parse_formula("all X. !X -o ?(X * 1)")
    assert formula_from_json(formula_to_json(f)) == f
    with pytest.raises(ParseError):
        formula_from_json({"tag": "nope"})
