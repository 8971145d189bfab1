import pytest

import type_system
from lambda_calculus import Variable, parse_term
from syntax import PreconditionError, TypingError
from type_system import (TUNIT, Arrow, TBang, TForall, TTensor, TVar, TypingDerivation, derivation_problems,
                         essential_violations, parse_type, reduce_derivation, render_derivation, render_type,
                         subject_reduction_check, subst_type, try_typecheck, type_alpha_eq, typecheck,
                         validate_derivation)

A = TVar("A")


def test_parse_and_render_types():
    assert parse_type("all X. X -o X") == TForall("X", Arrow(TVar("X"), TVar("X")))
    t = parse_type("!A * B -o C")
    assert t == Arrow(TTensor(TBang(A), TVar("B")), TVar("C"))
    assert render_type(t) == "!A * B -o C"
    assert parse_type("1") == TUNIT
    assert parse_type(render_type(parse_type("w (A -o A) -o 1"))) == parse_type("w (A -o A) -o 1")


def test_alpha_equivalence_and_substitution():
    assert type_alpha_eq(parse_type("all X. X -o X"), parse_type("all Y. Y -o Y"))
    assert not type_alpha_eq(parse_type("all X. X -o A"), parse_type("all Y. Y -o Y"))
    captured = subst_type(parse_type("all Y. X -o Y"), {"X": TVar("Y")})
    assert type_alpha_eq(captured, parse_type("all Z. Y -o Z"))


def test_essential_types():
    assert essential_violations(parse_type("!A -o B")) == []
    assert essential_violations(parse_type("A -o !B"))


def test_hand_built_derivation():
    ax = TypingDerivation("ax", (), (("x", A),), Variable("x"), A)
    d = TypingDerivation("lolli-i", (ax,), (), parse_term("\\x. x"), Arrow(A, A), ("x",))
    assert validate_derivation(d) is d
    assert "lolli-i" in render_derivation(d)
    wrong = TypingDerivation("lolli-i", (ax,), (), parse_term("\\x. x"), Arrow(A, TUNIT), ("x",))
    with pytest.raises(TypingError):
        validate_derivation(wrong)


def test_instantiation_refuses_exponential_witnesses():
    ax = TypingDerivation("ax", (), (("f", parse_type("all X. X")),), Variable("f"), parse_type("all X. X"))
    d = TypingDerivation("forall-e", (ax,), ax.context, Variable("f"), TBang(A), (TBang(A),))
    assert any("contains ! or w" in p for p in derivation_problems(d))


def test_typecheck_polymorphic_identity():
    d = typecheck(parse_term("\\x. x"), parse_type("all X. X -o X"))
    assert d.rule == "forall-i"
    inferred = typecheck(parse_term("\\x. x"))
    assert isinstance(inferred.type, Arrow)
    assert inferred.type.arg == inferred.type.res


def test_dereliction_through_contraction():
    d = typecheck(Variable("x"), A, context=[("x", TBang(A))])
    assert d.rule == "b"
    assert d.to_json()["type"] == "A"


def test_streams_need_the_stream_system():
    assert typecheck(parse_term("pop"), system="nupta2").rule == "pop"
    d, error = try_typecheck(parse_term("pop"), system="pta2")
    assert d is None and "streams" in error
    with pytest.raises(PreconditionError):
        typecheck(parse_term("x"), system="lambda")


def test_subject_reduction():
    d = typecheck(parse_term("(\\x. x) y"), A, context=[("y", A)])
    reduced = subject_reduction_check(d, Variable("y"))
    assert reduced.type == A
    with pytest.raises(PreconditionError):
        subject_reduction_check(d, Variable("z"))


@pytest.mark.parametrize("text, reduct, context", [
    ("(\\x. x * x) I", "I * I", []),
    ("(\\x. I) I", "I", []),
    ("(\\x. x * x) y", "y * y", [("y", TBang(A))]),
    ("\\y. (\\x. x) y", "\\y. y", []),
    ("let a*b = y * z in b * a", "z * y", [("y", A), ("z", A)]),
    ("let I = I in y", "y", [("y", A)]),
    ("pop (stream [I] selector period=[0])", "I * stream [I] selector period=[0]", []),
    ("disc (stream [I, I] selector period=[1, 0])", "I", []),
])
def test_subject_reduction_rewrites_the_derivation(monkeypatch, text, reduct, context):
    d = typecheck(parse_term(text), context=context)
    monkeypatch.setattr(type_system, "typecheck", lambda *args, **kwargs: pytest.fail("searched for a derivation"))
    reduced = subject_reduction_check(d, parse_term(reduct))
    assert validate_derivation(reduced) is reduced
    assert type_alpha_eq(reduced.type, d.type)
    assert [x for x, _ in reduced.context] == [x for x, _ in d.context]


def test_duplicated_promotion_is_absorbed_per_context_variable():
    d = typecheck(parse_term("(\\x. x * x) (f y)"), context=[("f", parse_type("!(A -o B)")), ("y", TBang(A))])
    reduced = reduce_derivation(d, ())
    validate_derivation(reduced)
    merged = sorted(node.data[0] for node in reduced.walk() if node.rule == "b")
    assert "f" in merged and "y" in merged


def test_reduce_derivation_needs_a_redex():
    d = typecheck(parse_term("y"), A, context=[("y", A)])
    with pytest.raises(TypingError):
        reduce_derivation(d, ())
