from data_encodings import BOOL, TRUE
from dagger import translate_dagger, translate_dagger_proof, translate_type
from lambda_calculus import Variable, parse_term
from proofgraph import validate
from syntax import ONE, Bang, Var, lolli, negate
from type_system import Arrow, TBang, TVar, TypingDerivation, parse_type, typecheck

A = TVar("A")


def test_type_translation():
    assert translate_type(parse_type("w A -o 1")) == lolli(Bang(Var("A")), ONE)
    assert translate_type(parse_type("!A -o A")) == lolli(Bang(Var("A")), Var("A"))


def test_axiom_and_abstraction():
    ax = TypingDerivation("ax", (), (("x", A),), Variable("x"), A)
    assert translate_dagger_proof(ax).conclusion == (negate(Var("A")), Var("A"))
    d = TypingDerivation("lolli-i", (ax,), (), parse_term("\\x. x"), Arrow(A, A), ("x",))
    proof = translate_dagger_proof(d)
    assert proof.conclusion == (lolli(Var("A"), Var("A")),)


def test_context_order_is_kept():
    d = typecheck(Variable("x"), A, context=[("x", TBang(A))])
    proof = translate_dagger_proof(d)
    assert proof.conclusion == (negate(Bang(Var("A"))), Var("A"))


def test_boolean_translates_to_a_valid_graph():
    d = typecheck(TRUE, BOOL)
    g = translate_dagger(d)
    assert validate(g).valid
    assert translate_dagger_proof(d).conclusion == (translate_type(BOOL),)
