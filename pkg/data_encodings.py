#!/usr/bin/env python3
"""
Data and arithmetic as terms.

Booleans take their two arguments as a pair, matching the derivation of B
in representation.py:

    B     = all X. X * X -o X * X          1 = \\p. let x*y = p in x*y
    N[A]  = !(A -o A) -o A -o A            n = \\f. \\z. f (... (f z))
    S[A]  = !(B -o A -o A) -o A -o A       b1...bn = \\f. \\z. f bn (... (f b1 z))

Tiered types nest without quantifiers: N_A[0] = A and N_A[d+1] = N[N_A[d]].
The closed types N and S quantify the base.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple, Union

from lambda_calculus import (
    DEFAULT_BETA_CAP,
    DISC,
    UNIT,
    Abs,
    App,
    LetPair,
    LetUnit,
    Pair,
    Stream,
    Term,
    Variable,
    alpha_equal,
    apply,
    beta_normalize,
    lam,
    let_tuple,
    render,
    substitute,
    tuple_term,
    var,
)
from selector import Selector
from syntax import DecodeError, PreconditionError, fresh_name
from type_system import (
    TUNIT,
    Arrow,
    TBang,
    TForall,
    TOmega,
    TTensor,
    TUnit,
    TVar,
    Type,
    render_type,
    subst_type,
    type_alpha_eq,
)

# Set up logging
logger = logging.getLogger(__name__)

KINDS = ("bool", "nat", "string", "stream")

X = TVar("X")
BOOL = TForall("X", Arrow(TTensor(X, X), TTensor(X, X)))
STREAM = TOmega(BOOL)


def nat_at(a: Type) -> Type:
    return Arrow(TBang(Arrow(a, a)), Arrow(a, a))


def string_at(a: Type) -> Type:
    return Arrow(TBang(Arrow(BOOL, Arrow(a, a))), Arrow(a, a))


NAT = TForall("X", nat_at(X))
STRING = TForall("X", string_at(X))


def nat_tier(d: int, base: Type = X) -> Type:
    """N_base[d]."""
    t = base
    for _ in range(d):
        t = nat_at(t)
    return t


def string_tier(d: int, base: Type = X) -> Type:
    """S_base[d] = S[N_base[d-1]]."""
    if d < 1:
        raise PreconditionError(f"string tiers start at 1, got {d}")
    return string_at(nat_tier(d - 1, base))


def bang(t: Type, times: int = 1) -> Type:
    for _ in range(times):
        t = TBang(t)
    return t


def tuple_type(*types: Type) -> Type:
    """A1 * ... * An nested to the left, matching tuple_term."""
    if not types:
        return TUNIT
    result = types[0]
    for t in types[1:]:
        result = TTensor(result, t)
    return result


def bits_type(k: int) -> Type:
    return tuple_type(*([BOOL] * k))


# ---------------------------------------------------------------------------
# Booleans
# ---------------------------------------------------------------------------

def encode_bool(bit: Union[int, str, bool]) -> Term:
    r"""\p. let x*y = p in x*y for 1, y*x for 0.

    Booleans take their two arguments as one pair, so that they inhabit
    all X. X*X -o X*X rather than the curried all X. X -o X -o X*X.
    """
    body = Pair(var("x"), var("y")) if int(bit) else Pair(var("y"), var("x"))
    return Abs("p", LetPair(var("p"), "x", "y", body))


TRUE = encode_bool(1)
FALSE = encode_bool(0)

# let I = u in I, for u : 1
ERASE_UNIT = Abs("u", LetUnit(var("u"), UNIT))

# W_B : B -o 1
WEAKEN_BOOL = Abs("b", LetPair(App(var("b"), Pair(UNIT, UNIT)), "x1", "x2",
                               LetUnit(var("x2"), var("x1"))))


def eraser(t: Type, inhabitants: Sequence[Tuple[Type, Term]] = ()) -> Term:
    """A closed term of type t -o 1.

    Universal types are erased at their instance by 1; erasing a function
    needs an inhabitant of its argument type.
    """
    if isinstance(t, TUnit):
        return ERASE_UNIT
    if type_alpha_eq(t, BOOL):
        return WEAKEN_BOOL
    if isinstance(t, TTensor):
        return Abs("p", LetPair(var("p"), "x", "y",
                                LetUnit(App(eraser(t.left, inhabitants), var("x")),
                                        App(eraser(t.right, inhabitants), var("y")))))
    if isinstance(t, Arrow):
        return Abs("f", App(eraser(t.res, inhabitants), App(var("f"), inhabitant(t.arg, inhabitants))))
    if isinstance(t, TForall):
        return eraser(subst_type(t.body, {t.var: TUNIT}), inhabitants)
    if isinstance(t, TBang):
        return Abs("x", UNIT)
    if isinstance(t, TOmega):
        return DISC
    raise PreconditionError(f"no linear eraser for type variable {t}")


def inhabitant(t: Type, inhabitants: Sequence[Tuple[Type, Term]] = ()) -> Term:
    """A closed term of type t, for the erasable fragment."""
    for known, term in inhabitants:
        if type_alpha_eq(known, t):
            return term
    if isinstance(t, TUnit):
        return UNIT
    if type_alpha_eq(t, BOOL):
        return FALSE
    if isinstance(t, TTensor):
        return Pair(inhabitant(t.left, inhabitants), inhabitant(t.right, inhabitants))
    if isinstance(t, Arrow):
        return Abs("x", LetUnit(App(eraser(t.arg, inhabitants), var("x")), inhabitant(t.res, inhabitants)))
    if isinstance(t, (TBang, TForall)):
        return inhabitant(t.body, inhabitants)
    if isinstance(t, TOmega):
        return Stream((inhabitant(t.body, inhabitants),), Selector.constant(1))
    raise PreconditionError(f"no inhabitant known for type variable {t}")


def proj(second: Type, inhabitants: Sequence[Tuple[Type, Term]] = ()) -> Term:
    """First projection of a pair whose second component has type second."""
    return Abs("p", LetPair(var("p"), "x1", "x2",
                            LetUnit(App(eraser(second, inhabitants), var("x2")), var("x1"))))


def cond(x: Term, if_one: Term, if_zero: Term, t: Type) -> Term:
    """if x then if_one else if_zero, both of type t."""
    return App(proj(t), App(x, Pair(if_one, if_zero)))


NOT = lam(["b", "p"], LetPair(var("p"), "x", "y", App(var("b"), Pair(var("y"), var("x")))))
OR = lam(["b1", "b2"], cond(var("b1"), TRUE, var("b2"), BOOL))
AND = lam(["b1", "b2"], cond(var("b1"), var("b2"), FALSE, BOOL))
XOR = lam(["b1", "b2"], App(proj(BOOL), App(var("b1"), Pair(App(NOT, var("b2")), var("b2")))))

# C_B : B -o B * B
COPY_BOOL = Abs("b", App(proj(TTensor(BOOL, BOOL)),
                         App(var("b"), Pair(Pair(TRUE, TRUE), Pair(FALSE, FALSE)))))


def boolean_ops() -> Dict[str, Term]:
    return {"not": NOT, "or": OR, "and": AND, "xor": XOR, "weaken": WEAKEN_BOOL,
            "copy": COPY_BOOL, "proj": proj(BOOL)}


def copies(b: Term, names: Sequence[str], body: Term) -> Term:
    """let n1*...*nk = k copies of b in body, by repeated C_B."""
    names = list(names)
    if len(names) == 1:
        return substitute(body, {names[0]: b})
    avoid = set(names) | body.fv | b.fv
    rest = fresh_name("c", avoid)
    return LetPair(App(COPY_BOOL, b), names[0], rest, copies(Variable(rest), names[1:], body))


def compile_boolean_function(fn: Callable[[Tuple[int, ...]], Sequence[int]], arity: int, width: int) -> Term:
    """Curried term B -o ... -o B^width computing fn.

    Each argument selects between the two compiled residual functions and
    the unused one is erased.
    """
    def residual_type(remaining: int) -> Type:
        t = bits_type(width)
        for _ in range(remaining):
            t = Arrow(BOOL, t)
        return t

    def build(prefix: Tuple[int, ...]) -> Term:
        if len(prefix) == arity:
            out = [int(b) for b in fn(prefix)]
            if len(out) != width:
                raise PreconditionError(f"function returned {len(out)} bits for {prefix}, expected {width}")
            return tuple_term(*(encode_bool(b) for b in out))
        name = f"x{len(prefix)}"
        one, zero = build(prefix + (1,)), build(prefix + (0,))
        return Abs(name, cond(var(name), one, zero, residual_type(arity - len(prefix) - 1)))

    if arity < 0 or width < 1:
        raise PreconditionError("boolean functions need arity >= 0 and at least one output")
    return build(())


def binary_function(table: str) -> Term:
    """B -o B -o B from its outputs on 00, 01, 10 and 11."""
    if len(table) != 4 or set(table) - {"0", "1"}:
        raise PreconditionError(f"truth table must be four bits, got {table!r}")
    return compile_boolean_function(lambda xs: (int(table[2 * xs[0] + xs[1]]),), 2, 1)


BINARY_TABLES = tuple(format(k, "04b") for k in range(16))


# ---------------------------------------------------------------------------
# Naturals and strings
# ---------------------------------------------------------------------------

def encode_nat(n: int) -> Term:
    if n < 0:
        raise PreconditionError(f"cannot encode negative number {n}")
    body: Term = var("z")
    for _ in range(n):
        body = App(var("f"), body)
    return lam(["f", "z"], body)


def encode_string(s: str) -> Term:
    if set(s) - {"0", "1"}:
        raise PreconditionError(f"not a binary string: {s!r}")
    body: Term = var("z")
    for ch in s:
        body = apply(var("f"), encode_bool(ch), body)
    return lam(["f", "z"], body)


def encode_stream(source: Union[Selector, Sequence[int]]) -> Term:
    """Bit stream over the calls 0 and 1; a sequence is read as a periodic cycle."""
    sel = source if isinstance(source, Selector) else Selector.periodic(2, (), tuple(int(b) for b in source))
    if sel.calls != 2:
        sel = Selector(2, sel.prefix, sel.period, sel.table)
    return Stream((FALSE, TRUE), sel.validate())


EMPTY_STRING = encode_string("")
ZERO = encode_nat(0)

SUCC = lam(["n", "f", "z"], apply(var("n"), var("f"), App(var("f"), var("z"))))
ADD = lam(["n", "m"], apply(var("n"), SUCC, var("m")))
MULT = lam(["n", "m"], apply(var("m"), Abs("y", apply(ADD, var("n"), var("y"))), ZERO))
DOWN = Abs("x", apply(var("x"), SUCC, ZERO))
# Same reduction as DOWN, typed N[!^j A] -o !^j A to promote a count. It
# carries its own successor so that the declared type of SUCC does not apply.
LIFT = Abs("k", apply(var("k"), lam(["k", "g", "w"], apply(var("k"), var("g"), App(var("g"), var("w")))), ZERO))
ITER = lam(["n", "f", "z"], apply(var("n"), var("f"), var("z")))

# appends b as the last character
SNOC = lam(["b", "u", "f", "z"], apply(var("f"), var("b"), apply(var("u"), var("f"), var("z"))))
DOWN_STRING = Abs("x", apply(var("x"), SNOC, EMPTY_STRING))
LENGTH = lam(["s", "f"], App(var("s"), lam(["x", "y"], LetUnit(App(WEAKEN_BOOL, var("x")),
                                                                    App(var("f"), var("y"))))))
ITER_STRING = lam(["s", "f", "z"], apply(var("s"), var("f"), var("z")))


def arithmetic() -> Dict[str, Term]:
    return {"succ": SUCC, "add": ADD, "mult": MULT}


def iterators() -> Dict[str, Term]:
    return {"iter": ITER, "iter_S": ITER_STRING}


def coercions(d: int = 1) -> Dict[str, Term]:
    """down and down_S applied d times."""
    return {"down": _power(DOWN, d), "down_S": _power(DOWN_STRING, d)}


def _power(f: Term, d: int) -> Term:
    if d == 1:
        return f
    body: Term = var("v")
    for _ in range(d):
        body = App(f, body)
    return Abs("v", body)


def copy_string(n: int = 2) -> Term:
    """S[S_A1 * ... * S_An] -o S_A1 * ... * S_An."""
    us = [f"u{i}" for i in range(n)]
    bs = [f"b{i}" for i in range(n)]
    step_body = tuple_term(*(apply(SNOC, var(b), var(u)) for b, u in zip(bs, us)))
    step = lam(["b", "p"], let_tuple(var("p"), us, copies(var("b"), bs, step_body)))
    return Abs("s", apply(var("s"), step, tuple_term(*([EMPTY_STRING] * n))))


def compile_polynomial(coefficients: Sequence[int], variable: str = "x") -> Term:
    """Horner term for a0 + a1 x + ... + ad x^d with the free variable x.

    x : !^(d-1) N_A[d+1] |- term : N_A[1]. Every occurrence of x below the
    outer one feeds a promoted argument of mult; the outer one is brought
    down to N_A[2] by d-1 applications of down.
    """
    coefficients = [int(a) for a in coefficients]
    if len(coefficients) < 2 or any(a < 0 for a in coefficients):
        raise PreconditionError("need a polynomial of degree > 0 with nonnegative coefficients")
    x = var(variable)

    def horner(cs: List[int]) -> Term:
        degree = len(cs) - 1
        if degree == 1:
            inner = apply(MULT, encode_nat(cs[1]), x)
        else:
            lowered: Term = x
            for _ in range(degree - 1):
                lowered = App(DOWN, lowered)
            inner = apply(MULT, horner(cs[1:]), lowered)
        return apply(ADD, encode_nat(cs[0]), inner)

    return horner(coefficients)


def polynomial_function(coefficients: Sequence[int]) -> Term:
    return Abs("x", compile_polynomial(coefficients, "x"))


def polynomial_context(coefficients: Sequence[int], base: Type = X) -> Tuple[Tuple[str, Type], ...]:
    d = len(coefficients) - 1
    return (("x", bang(nat_tier(d + 1, base), d - 1)),)


def evaluate_polynomial(coefficients: Sequence[int], n: int) -> int:
    result = 0
    for a in reversed(list(coefficients)):
        result = result * n + int(a)
    return result


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def _applied_to_fresh(t: Term, *names: str) -> Tuple[Term, List[str]]:
    avoid = set(t.fv)
    fresh = []
    for name in names:
        fresh.append(fresh_name(name, avoid))
        avoid.add(fresh[-1])
    return apply(t, *(Variable(n) for n in fresh)), fresh


def decode_bool(t: Term, cap: int = DEFAULT_BETA_CAP) -> int:
    avoid = set(t.fv)
    a = fresh_name("a", avoid)
    b = fresh_name("b", avoid | {a})
    normal = beta_normalize(App(t, Pair(Variable(a), Variable(b))), cap)
    if alpha_equal(normal, Pair(Variable(a), Variable(b))):
        return 1
    if alpha_equal(normal, Pair(Variable(b), Variable(a))):
        return 0
    raise DecodeError("term does not behave as a boolean")


def decode_nat(t: Term, cap: int = DEFAULT_BETA_CAP) -> int:
    applied, (f, z) = _applied_to_fresh(t, "f", "z")
    node = beta_normalize(applied, cap)
    count = 0
    while isinstance(node, App) and node.fun == Variable(f):
        count += 1
        node = node.arg
    if node != Variable(z):
        raise DecodeError("term does not behave as a natural number")
    return count


def decode_string(t: Term, cap: int = DEFAULT_BETA_CAP) -> str:
    applied, (f, z) = _applied_to_fresh(t, "f", "z")
    node = beta_normalize(applied, cap)
    bits = []
    while isinstance(node, App) and isinstance(node.fun, App) and node.fun.fun == Variable(f):
        bits.append(str(decode_bool(node.fun.arg, cap)))
        node = node.arg
    if node != Variable(z):
        raise DecodeError("term does not behave as a string")
    return "".join(reversed(bits))


def decode_stream(t: Term, n: int) -> str:
    if not isinstance(t, Stream):
        raise DecodeError("not a stream")
    return "".join(str(decode_bool(c)) for c in t.take(n))


def decode(t: Term, kind: str, cap: int = DEFAULT_BETA_CAP, length: int = 8):
    if kind == "bool":
        return decode_bool(t, cap)
    if kind == "nat":
        return decode_nat(t, cap)
    if kind == "string":
        return decode_string(t, cap)
    if kind == "stream":
        return decode_stream(t, length)
    raise DecodeError(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class EncodedValue:
    kind: str
    payload: object
    term: Term
    type: Type

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.payload if self.kind != "stream" else self.payload.to_json(),
                "term": render(self.term), "type": render_type(self.type)}


def encode(kind: str, value) -> EncodedValue:
    if kind == "bool":
        return EncodedValue(kind, int(value), encode_bool(value), BOOL)
    if kind == "nat":
        return EncodedValue(kind, int(value), encode_nat(int(value)), NAT)
    if kind == "string":
        return EncodedValue(kind, str(value), encode_string(str(value)), STRING)
    if kind == "stream":
        term = encode_stream(value)
        return EncodedValue(kind, term.selector, term, STREAM)
    raise PreconditionError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# Declared types
# ---------------------------------------------------------------------------

# Exponentiation by iterating a numeral; untypable since the iterated
# numeral would need a !-type as the instance of N.
EXP = Abs("n", App(var("n"), encode_nat(2)))


def library_hints() -> Dict[Term, Type]:
    """Declared types of the closed library terms, generic in X."""
    b, n1, n2, s1 = BOOL, nat_tier(1), nat_tier(2), string_at(X)
    hints = {
        TRUE: b, FALSE: b,
        NOT: Arrow(b, b), OR: Arrow(b, Arrow(b, b)), AND: Arrow(b, Arrow(b, b)), XOR: Arrow(b, Arrow(b, b)),
        WEAKEN_BOOL: Arrow(b, TUNIT), ERASE_UNIT: Arrow(TUNIT, TUNIT),
        COPY_BOOL: Arrow(b, TTensor(b, b)),
        SUCC: Arrow(n1, n1), ADD: Arrow(n2, Arrow(n1, n1)),
        MULT: Arrow(TBang(n2), Arrow(n2, n1)), DOWN: Arrow(n2, n1),
        ITER: Arrow(n1, n1),
        EMPTY_STRING: s1, SNOC: Arrow(b, Arrow(s1, s1)),
        DOWN_STRING: Arrow(string_at(s1), s1),
        LENGTH: Arrow(s1, nat_at(X)), ITER_STRING: Arrow(s1, s1),
    }
    return hints


def declared_types() -> Dict[str, Tuple[Term, Type]]:
    """Named library terms with their declared types, for the typecheck table."""
    hints = library_hints()
    names = {
        "true": TRUE, "false": FALSE, "not": NOT, "or": OR, "and": AND, "xor": XOR,
        "weaken": WEAKEN_BOOL, "copy": COPY_BOOL, "succ": SUCC, "add": ADD, "mult": MULT,
        "down": DOWN, "iter": ITER, "empty": EMPTY_STRING, "snoc": SNOC, "down_S": DOWN_STRING,
        "length": LENGTH, "iter_S": ITER_STRING,
    }
    return {name: (term, hints[term]) for name, term in names.items()}
