import pytest

from lambda_calculus import (UNIT, Pair, Variable, alpha_equal, apply, beta_normalize, beta_reduce, compose,
                             identity, let_tuple, parse_term, reduction_sequence, redexes, render, substitute,
                             term_size, tuple_term)
from syntax import ParseError, StepLimitExceeded

a, b, c = Variable("a"), Variable("b"), Variable("c")


def test_parse_and_render():
    t = parse_term("\\x y. let u*v = x in u * (v y)")
    assert render(parse_term(render(t))) == render(t)
    assert render(parse_term("\\x. \\y. x y")) == "\\x y. x y"
    assert term_size(parse_term("x y")) == 3


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_term("\\x.")
    with pytest.raises(ParseError):
        parse_term("stream [a] selector period=[1]")


def test_beta_and_pairs():
    assert beta_normalize(parse_term("(\\x. x) y")) == Variable("y")
    result = beta_reduce(parse_term("let x*y = a * b in y * x"))
    assert result.term == Pair(b, a)
    assert result.kinds == {"let-pair": 1}
    assert beta_normalize(parse_term("let I = I in x")) == Variable("x")
    assert result.to_json()["steps"] == 1


def test_streams_pop_and_discard():
    result = beta_reduce(parse_term("pop (stream [a, b] selector period=[1, 0])"))
    assert result.term.left == b
    assert result.term.right.take(3) == [a, b, a]
    assert result.kinds == {"pop": 1}
    assert beta_normalize(parse_term("disc (stream [a])")) == UNIT


def test_step_cap():
    t = parse_term("(\\x. x) ((\\x. x) y)")
    assert beta_reduce(t).steps == 2
    with pytest.raises(StepLimitExceeded):
        beta_reduce(t, cap=1)


def test_leftmost_outermost_sequence():
    t = parse_term("(\\x. x) ((\\x. x) y)")
    assert len(list(redexes(t))) == 2
    sequence = list(reduction_sequence(t))
    assert len(sequence) == 3
    assert sequence[-1] == Variable("y")


def test_capture_avoiding_substitution():
    result = substitute(parse_term("\\y. x y"), {"x": Variable("y")})
    assert alpha_equal(result, parse_term("\\z. y z"))
    assert not alpha_equal(result, parse_term("\\y. y y"))


def test_tuple_builders():
    t = let_tuple(tuple_term(a, b, c), ["x", "y", "z"],
                  tuple_term(Variable("z"), Variable("y"), Variable("x")))
    assert beta_normalize(t) == tuple_term(c, b, a)
    assert beta_normalize(apply(compose(identity(), identity()), a)) == a
    assert tuple_term() == UNIT
