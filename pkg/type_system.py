#!/usr/bin/env python3
"""
Types, typing derivations and the type checker for stream terms.

    A ::= X | 1 | s -o A | all X. A
    s ::= A | s * s | !s | w s

PTA2 is the fragment without stream, pop and disc; nuPTA2 has all of them.
Instantiating a universal with a type that contains ! or w is refused in
both systems.

typecheck() searches for a derivation bidirectionally, solving unknown
instantiations by unification, and only returns what validate_derivation()
accepts. The search is incomplete; known closed subterms can be given
declared types through hints.

reduce_derivation() turns a derivation of a redex into one of its reduct
by substitution of derivations, without searching.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from lark import Lark, Transformer
from lark.exceptions import LarkError, UnexpectedInput

from lambda_calculus import (
    UNIT, Abs, App, Disc, FunctionStream, LetPair, LetUnit, Pair, Pop, Stream, Term, Unit, Variable,
    alpha_equal, redex_kind, redexes, reduce_at, render as render_term, rename_free, substitute as substitute_term,
)
from syntax import ParseError, PreconditionError, TypingError, fresh_name

# Set up logging
logger = logging.getLogger(__name__)

SYSTEMS = ("pta2", "nupta2")


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TUnit:
    pass


@dataclass(frozen=True)
class Arrow:
    arg: "Type"
    res: "Type"


@dataclass(frozen=True)
class TTensor:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TBang:
    body: "Type"


@dataclass(frozen=True)
class TOmega:
    body: "Type"


@dataclass(frozen=True)
class TForall:
    var: str
    body: "Type"


@dataclass(frozen=True)
class Meta:
    """Unknown type solved during checking; never part of a returned derivation."""

    id: int


Type = Union[TVar, TUnit, Arrow, TTensor, TBang, TOmega, TForall, Meta]
TUNIT = TUnit()
Context = Tuple[Tuple[str, Type], ...]


def type_free_vars(t: Type) -> FrozenSet[str]:
    if isinstance(t, TVar):
        return frozenset((t.name,))
    if isinstance(t, (TUnit, Meta)):
        return frozenset()
    if isinstance(t, (Arrow, TTensor)):
        a, b = (t.arg, t.res) if isinstance(t, Arrow) else (t.left, t.right)
        return type_free_vars(a) | type_free_vars(b)
    if isinstance(t, (TBang, TOmega)):
        return type_free_vars(t.body)
    if isinstance(t, TForall):
        return type_free_vars(t.body) - {t.var}
    raise TypeError(f"not a type: {t!r}")


def type_names(t: Type) -> FrozenSet[str]:
    """Every type variable name, bound or free."""
    if isinstance(t, TForall):
        return type_names(t.body) | {t.var}
    if isinstance(t, Arrow):
        return type_names(t.arg) | type_names(t.res)
    if isinstance(t, TTensor):
        return type_names(t.left) | type_names(t.right)
    if isinstance(t, (TBang, TOmega)):
        return type_names(t.body)
    return type_free_vars(t)


def subst_type(t: Type, mapping: Mapping[str, Type]) -> Type:
    """Simultaneous capture-avoiding substitution of type variables."""
    if not mapping:
        return t
    if isinstance(t, TVar):
        return mapping.get(t.name, t)
    if isinstance(t, (TUnit, Meta)):
        return t
    if isinstance(t, Arrow):
        return Arrow(subst_type(t.arg, mapping), subst_type(t.res, mapping))
    if isinstance(t, TTensor):
        return TTensor(subst_type(t.left, mapping), subst_type(t.right, mapping))
    if isinstance(t, TBang):
        return TBang(subst_type(t.body, mapping))
    if isinstance(t, TOmega):
        return TOmega(subst_type(t.body, mapping))
    if isinstance(t, TForall):
        inner = {k: v for k, v in mapping.items() if k != t.var}
        if not inner:
            return t
        danger = set().union(*(type_free_vars(v) for v in inner.values()))
        if t.var in danger:
            new = fresh_name(t.var, danger | type_names(t.body) | set(inner))
            inner[t.var] = TVar(new)
            return TForall(new, subst_type(t.body, inner))
        return TForall(t.var, subst_type(t.body, inner))
    raise TypeError(f"not a type: {t!r}")


def _alpha(a: Type, b: Type, ea: Dict[str, int], eb: Dict[str, int]) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, TVar):
        return ea.get(a.name, a.name) == eb.get(b.name, b.name)
    if isinstance(a, (TUnit, Meta)):
        return a == b
    if isinstance(a, Arrow):
        return _alpha(a.arg, b.arg, ea, eb) and _alpha(a.res, b.res, ea, eb)
    if isinstance(a, TTensor):
        return _alpha(a.left, b.left, ea, eb) and _alpha(a.right, b.right, ea, eb)
    if isinstance(a, (TBang, TOmega)):
        return _alpha(a.body, b.body, ea, eb)
    depth = len(ea) + 1
    return _alpha(a.body, b.body, {**ea, a.var: -depth}, {**eb, b.var: -depth})


def type_alpha_eq(a: Type, b: Type) -> bool:
    return a == b or _alpha(a, b, {}, {})


def is_bang_omega_free(t: Type) -> bool:
    if isinstance(t, (TBang, TOmega)):
        return False
    if isinstance(t, Arrow):
        return is_bang_omega_free(t.arg) and is_bang_omega_free(t.res)
    if isinstance(t, TTensor):
        return is_bang_omega_free(t.left) and is_bang_omega_free(t.right)
    if isinstance(t, TForall):
        return is_bang_omega_free(t.body)
    return True


def is_linear_type(t: Type) -> bool:
    return isinstance(t, (TVar, TUnit, Arrow, TForall))


def essential_violations(t: Type) -> List[str]:
    """Places where t leaves the stratified grammar of essential types."""
    problems = []

    def linear(a):
        if isinstance(a, Arrow):
            general(a.arg)
            if not is_linear_type(a.res):
                problems.append(f"result of {render_type(a)} is not a linear type")
            linear(a.res) if is_linear_type(a.res) else general(a.res)
        elif isinstance(a, TForall):
            if not is_linear_type(a.body):
                problems.append(f"body of {render_type(a)} is not a linear type")
            general(a.body)

    def general(s):
        if isinstance(s, TTensor):
            general(s.left)
            general(s.right)
        elif isinstance(s, (TBang, TOmega)):
            general(s.body)
        else:
            linear(s)

    general(t)
    return problems


# Binding strength used by the printer; higher binds tighter.
_LEVEL_ARROW, _LEVEL_TENSOR, _LEVEL_UNARY = 0, 1, 2


def _render_type(t: Type, level: int) -> str:
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TUnit):
        return "1"
    if isinstance(t, Meta):
        return f"?{t.id}"
    if isinstance(t, TBang):
        return "!" + _render_type(t.body, _LEVEL_UNARY)
    if isinstance(t, TOmega):
        return "w " + _render_type(t.body, _LEVEL_UNARY)
    if isinstance(t, TForall):
        text, own = f"all {t.var}. {_render_type(t.body, _LEVEL_ARROW)}", _LEVEL_ARROW
    elif isinstance(t, Arrow):
        text = f"{_render_type(t.arg, _LEVEL_TENSOR)} -o {_render_type(t.res, _LEVEL_ARROW)}"
        own = _LEVEL_ARROW
    elif isinstance(t, TTensor):
        text = f"{_render_type(t.left, _LEVEL_TENSOR)} * {_render_type(t.right, _LEVEL_UNARY)}"
        own = _LEVEL_TENSOR
    else:
        raise TypeError(f"not a type: {t!r}")
    return f"({text})" if own < level else text


def render_type(t: Type) -> str:
    return _render_type(t, _LEVEL_ARROW)


TYPE_GRAMMAR = r"""
?type: "all" NAME "." type                 -> forall
     | tensor_type "-o" type               -> arrow
     | tensor_type

?tensor_type: tensor_type "*" unary        -> tensor
            | unary

?unary: "!" unary                          -> bang
      | "w" unary                          -> omega
      | atom

?atom: NAME                                -> tvar
     | "1"                                 -> unit
     | "(" type ")"

NAME: /(?!(all|w)\b)[A-Za-z_][A-Za-z0-9_']*/

%import common.WS
%ignore WS
"""


class TypeBuilder(Transformer):
    def forall(self, args):
        return TForall(str(args[0]), args[1])

    def arrow(self, args):
        return Arrow(args[0], args[1])

    def tensor(self, args):
        return TTensor(args[0], args[1])

    def bang(self, args):
        return TBang(args[0])

    def omega(self, args):
        return TOmega(args[0])

    def tvar(self, args):
        return TVar(str(args[0]))

    def unit(self, args):
        return TUNIT


_type_parser = Lark(TYPE_GRAMMAR, start="type", parser="lalr")


def parse_type(text: str) -> Type:
    try:
        tree = _type_parser.parse(text)
    except UnexpectedInput as e:
        raise ParseError(f"syntax error: {str(e).splitlines()[0]}", e.line, e.column) from None
    except LarkError as e:
        raise ParseError(f"syntax error: {str(e)}") from None
    return TypeBuilder().transform(tree)


def type_to_json(t: Type) -> dict:
    if isinstance(t, TVar):
        return {"var": t.name}
    if isinstance(t, TUnit):
        return {"unit": True}
    if isinstance(t, Arrow):
        return {"arrow": [type_to_json(t.arg), type_to_json(t.res)]}
    if isinstance(t, TTensor):
        return {"tensor": [type_to_json(t.left), type_to_json(t.right)]}
    if isinstance(t, TBang):
        return {"bang": type_to_json(t.body)}
    if isinstance(t, TOmega):
        return {"omega": type_to_json(t.body)}
    if isinstance(t, TForall):
        return {"forall": t.var, "body": type_to_json(t.body)}
    raise TypeError(f"cannot serialize {t!r}")


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

RULES = ("ax", "lolli-i", "lolli-e", "tensor-i", "tensor-e", "forall-i", "forall-e",
         "unit-i", "unit-e", "fp", "w", "b", "stream", "disc", "pop")


@dataclass(frozen=True)
class TypingDerivation:
    """A node concluding context |- term : type.

    data per rule: lolli-i (x,), tensor-e (x, y), forall-i (X,),
    forall-e (witness,), w (x, !s), b (x, y, z); empty otherwise.
    """

    rule: str
    premises: Tuple["TypingDerivation", ...]
    context: Context
    term: Term
    type: Type
    data: tuple = ()

    def judgement(self) -> str:
        ctx = ", ".join(f"{x}: {render_type(t)}" for x, t in self.context)
        return f"{ctx} |- {render_term(self.term)} : {render_type(self.type)}"

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def walk(self):
        yield self
        for p in self.premises:
            yield from p.walk()

    def to_json(self) -> dict:
        data = []
        for item in self.data:
            data.append(type_to_json(item) if not isinstance(item, str) else item)
        return {
            "rule": self.rule,
            "context": [[x, render_type(t)] for x, t in self.context],
            "term": render_term(self.term),
            "type": render_type(self.type),
            "data": data,
            "premises": [p.to_json() for p in self.premises],
        }


def render_derivation(d: TypingDerivation, indent: int = 0) -> str:
    lines = [f"{'  ' * indent}{d.rule}: {d.judgement()}"]
    for p in d.premises:
        lines.append(render_derivation(p, indent + 1))
    return "\n".join(lines)


def _ctx_dict(ctx: Context, problems: List[str], where: str) -> Dict[str, Type]:
    result = {}
    for x, t in ctx:
        if x in result:
            problems.append(f"{where}: variable {x} declared twice")
        result[x] = t
    return result


def _same_ctx(a: Dict[str, Type], b: Dict[str, Type]) -> bool:
    return a.keys() == b.keys() and all(type_alpha_eq(a[x], b[x]) for x in a)


def _join(a: Dict[str, Type], b: Dict[str, Type], problems: List[str], where: str) -> Dict[str, Type]:
    shared = set(a) & set(b)
    if shared:
        problems.append(f"{where}: premises share variables {sorted(shared)}")
    return {**a, **b}


def _check_node(d: TypingDerivation, system: str, problems: List[str]):
    where = d.rule
    ctx = _ctx_dict(d.context, problems, where)
    ps = d.premises
    pctx = [_ctx_dict(p.context, problems, where) for p in ps]
    arity = {"ax": 0, "unit-i": 0, "disc": 0, "pop": 0, "lolli-e": 2, "tensor-i": 2,
             "tensor-e": 2, "unit-e": 2}
    if d.rule not in RULES:
        problems.append(f"unknown rule {d.rule}")
        return
    if d.rule != "stream" and len(ps) != arity.get(d.rule, 1):
        problems.append(f"{where}: expected {arity.get(d.rule, 1)} premises, found {len(ps)}")
        return
    if not d.term.fv <= set(ctx):
        problems.append(f"{where}: free variables {sorted(d.term.fv - set(ctx))} are not declared")
    t, ty = d.term, d.type

    if d.rule == "ax":
        if not (isinstance(t, Variable) and len(ctx) == 1 and t.name in ctx and type_alpha_eq(ctx[t.name], ty)):
            problems.append(f"ax: {d.judgement()} is not an axiom")
    elif d.rule == "lolli-i":
        (x,) = d.data
        if not (isinstance(t, Abs) and t.var == x and alpha_equal(t.body, ps[0].term)):
            problems.append("lolli-i: term is not the abstraction of the premise term")
        expected = dict(pctx[0])
        arg = expected.pop(x, None)
        if arg is None or x in ctx or not _same_ctx(expected, ctx):
            problems.append(f"lolli-i: premise context must be the conclusion context plus {x}")
        elif not type_alpha_eq(ty, Arrow(arg, ps[0].type)):
            problems.append(f"lolli-i: type {render_type(ty)} does not match the premise")
    elif d.rule == "lolli-e":
        fun = ps[0].type
        if not (isinstance(t, App) and alpha_equal(t.fun, ps[0].term) and alpha_equal(t.arg, ps[1].term)):
            problems.append("lolli-e: term is not the application of the premise terms")
        if not isinstance(fun, Arrow):
            problems.append(f"lolli-e: {render_type(fun)} is not a function type")
        elif not (type_alpha_eq(fun.arg, ps[1].type) and type_alpha_eq(fun.res, ty)):
            problems.append("lolli-e: argument or result type mismatch")
        if not _same_ctx(_join(pctx[0], pctx[1], problems, where), ctx):
            problems.append("lolli-e: conclusion context is not the union of the premise contexts")
    elif d.rule == "tensor-i":
        if not (isinstance(t, Pair) and alpha_equal(t.left, ps[0].term) and alpha_equal(t.right, ps[1].term)):
            problems.append("tensor-i: term is not the pair of the premise terms")
        if not type_alpha_eq(ty, TTensor(ps[0].type, ps[1].type)):
            problems.append("tensor-i: type mismatch")
        if not _same_ctx(_join(pctx[0], pctx[1], problems, where), ctx):
            problems.append("tensor-i: conclusion context is not the union of the premise contexts")
    elif d.rule == "tensor-e":
        x, y = d.data
        scrut = ps[0].type
        if not (isinstance(t, LetPair) and (t.first, t.second) == (x, y)
                and alpha_equal(t.scrutinee, ps[0].term) and alpha_equal(t.body, ps[1].term)):
            problems.append("tensor-e: term does not match the premises")
        body_ctx = dict(pctx[1])
        sx, sy = body_ctx.pop(x, None), body_ctx.pop(y, None)
        if x == y or sx is None or sy is None:
            problems.append(f"tensor-e: second premise must declare {x} and {y}")
        elif not (isinstance(scrut, TTensor) and type_alpha_eq(scrut.left, sx) and type_alpha_eq(scrut.right, sy)):
            problems.append(f"tensor-e: {render_type(scrut)} does not split as {x}, {y}")
        if not type_alpha_eq(ty, ps[1].type):
            problems.append("tensor-e: type mismatch")
        if not _same_ctx(_join(pctx[0], body_ctx, problems, where), ctx):
            problems.append("tensor-e: conclusion context is not the union of the premise contexts")
    elif d.rule == "forall-i":
        (x,) = d.data
        if not (isinstance(ty, TForall) and ty.var == x and type_alpha_eq(ty.body, ps[0].type)):
            problems.append("forall-i: conclusion must quantify the premise type")
        if any(x in type_free_vars(s) for s in ctx.values()):
            problems.append(f"forall-i: {x} is free in the context")
        if not (alpha_equal(t, ps[0].term) and _same_ctx(ctx, pctx[0])):
            problems.append("forall-i: term or context changed")
    elif d.rule == "forall-e":
        (witness,) = d.data
        body = ps[0].type
        if not isinstance(body, TForall):
            problems.append(f"forall-e: {render_type(body)} is not universal")
        elif not type_alpha_eq(ty, subst_type(body.body, {body.var: witness})):
            problems.append("forall-e: conclusion is not the instance of the premise")
        if not is_bang_omega_free(witness):
            problems.append(f"forall-e: witness {render_type(witness)} contains ! or w")
        if not (alpha_equal(t, ps[0].term) and _same_ctx(ctx, pctx[0])):
            problems.append("forall-e: term or context changed")
    elif d.rule == "unit-i":
        if not (isinstance(t, Unit) and not ctx and isinstance(ty, TUnit)):
            problems.append("unit-i: expected |- I : 1")
    elif d.rule == "unit-e":
        if not (isinstance(t, LetUnit) and alpha_equal(t.scrutinee, ps[0].term) and alpha_equal(t.body, ps[1].term)):
            problems.append("unit-e: term does not match the premises")
        if not isinstance(ps[0].type, TUnit):
            problems.append("unit-e: first premise must have type 1")
        if not type_alpha_eq(ty, ps[1].type):
            problems.append("unit-e: type mismatch")
        if not _same_ctx(_join(pctx[0], pctx[1], problems, where), ctx):
            problems.append("unit-e: conclusion context is not the union of the premise contexts")
    elif d.rule == "fp":
        promoted = {x: TBang(s) for x, s in pctx[0].items()}
        if not _same_ctx(promoted, ctx):
            problems.append("fp: conclusion context must be the premise context under !")
        if not (type_alpha_eq(ty, TBang(ps[0].type)) and alpha_equal(t, ps[0].term)):
            problems.append("fp: conclusion must be the premise under !")
    elif d.rule == "w":
        x, weakened = d.data
        if not isinstance(weakened, TBang):
            problems.append(f"w: {x} must have an exponential type")
        if x in pctx[0] or not _same_ctx({**pctx[0], x: weakened}, ctx):
            problems.append(f"w: conclusion context must add {x} to the premise context")
        if not (type_alpha_eq(ty, ps[0].type) and alpha_equal(t, ps[0].term)):
            problems.append("w: term or type changed")
    elif d.rule == "b":
        x, y, z = d.data
        premise = dict(pctx[0])
        sy, sz = premise.pop(y, None), premise.pop(z, None)
        if y == z or sy is None or sz is None:
            problems.append(f"b: premise must declare {y} and {z}")
        elif not type_alpha_eq(sz, TBang(sy)):
            problems.append(f"b: {z} must have type !{render_type(sy)}")
        elif x in premise or not _same_ctx({**premise, x: sz}, ctx):
            problems.append(f"b: conclusion context must merge {y} and {z} into {x}")
        merged = substitute_term(ps[0].term, {y: Variable(x), z: Variable(x)})
        if not alpha_equal(t, merged):
            problems.append("b: term is not the premise term with both variables merged")
        if not type_alpha_eq(ty, ps[0].type):
            problems.append("b: type changed")
    elif d.rule == "stream":
        if system != "nupta2":
            problems.append("stream: not available without streams")
        if isinstance(t, FunctionStream):
            problems.append("stream: infinitely many distinct calls")
        elif not isinstance(t, Stream):
            problems.append("stream: term is not a stream")
        else:
            problems.extend(f"stream: {p}" for p in t.selector.check())
            if len(ps) != len(t.calls):
                problems.append("stream: one premise per call expected")
            if not isinstance(ty, TOmega):
                problems.append("stream: type must be w s")
            else:
                for p, call in zip(ps, t.calls):
                    if p.context or not alpha_equal(p.term, call) or not type_alpha_eq(p.type, ty.body):
                        problems.append(f"stream: premise for {render_term(call)} does not match")
        if ctx:
            problems.append("stream: context must be empty")
    elif d.rule in ("disc", "pop"):
        if system != "nupta2":
            problems.append(f"{d.rule}: not available without streams")
        ok = isinstance(ty, Arrow) and isinstance(ty.arg, TOmega) and not ctx
        if d.rule == "disc":
            ok = ok and isinstance(t, Disc) and isinstance(ty.res, TUnit)
        else:
            ok = (ok and isinstance(t, Pop) and isinstance(ty.res, TTensor)
                  and type_alpha_eq(ty.res.left, ty.arg.body) and type_alpha_eq(ty.res.right, ty.arg))
        if not ok:
            problems.append(f"{d.rule}: {d.judgement()} is not an instance of the rule")


def derivation_problems(d: TypingDerivation, system: str = "nupta2") -> List[str]:
    problems: List[str] = []
    for node in d.walk():
        _check_node(node, system, problems)
    for node in d.walk():
        for item in (node.type,) + tuple(t for _, t in node.context):
            if _has_meta(item):
                problems.append(f"{node.rule}: unsolved type {render_type(item)}")
    return problems


def validate_derivation(d: TypingDerivation, system: str = "nupta2") -> TypingDerivation:
    problems = derivation_problems(d, system)
    if problems:
        raise TypingError(f"invalid {system} derivation: {problems[0]}")
    return d


def _has_meta(t: Type) -> bool:
    if isinstance(t, Meta):
        return True
    if isinstance(t, Arrow):
        return _has_meta(t.arg) or _has_meta(t.res)
    if isinstance(t, TTensor):
        return _has_meta(t.left) or _has_meta(t.right)
    if isinstance(t, (TBang, TOmega, TForall)):
        return _has_meta(t.body)
    return False


def map_derivation_types(d: TypingDerivation, f: Callable[[Type], Type]) -> TypingDerivation:
    data = tuple(f(item) if not isinstance(item, str) else item for item in d.data)
    return TypingDerivation(d.rule, tuple(map_derivation_types(p, f) for p in d.premises),
                            tuple((x, f(t)) for x, t in d.context), d.term, f(d.type), data)


def instantiate_derivation(d: TypingDerivation, mapping: Mapping[str, Type]) -> TypingDerivation:
    """d with free type variables replaced, leaving eigenvariables alone."""
    if d.rule == "forall-i":
        mapping = {k: v for k, v in mapping.items() if k != d.data[0]}
    premises = tuple(instantiate_derivation(p, mapping) for p in d.premises)
    data = tuple(subst_type(item, mapping) if not isinstance(item, str) else item for item in d.data)
    return TypingDerivation(d.rule, premises, tuple((x, subst_type(t, mapping)) for x, t in d.context),
                            d.term, subst_type(d.type, mapping), data)


# ---------------------------------------------------------------------------
# Checker
# ---------------------------------------------------------------------------

def _node(rule, premises, ctx: Mapping[str, Type], term, ty, data=()) -> TypingDerivation:
    return TypingDerivation(rule, tuple(premises), tuple(ctx.items()), term, ty, tuple(data))


def _count(t: Term, name: str) -> int:
    if isinstance(t, Variable):
        return int(t.name == name)
    if name not in t.fv:
        return 0
    return sum(_count(c, name) for c in t.children())


class _Checker:
    def __init__(self, system: str, hints: Optional[Mapping[Term, Type]] = None):
        if system not in SYSTEMS:
            raise PreconditionError(f"unknown type system {system}")
        self.system = system
        self.hints = dict(hints or {})
        self.solution: Dict[int, Type] = {}
        self.ids = itertools.count()
        self.hint_cache: Dict[Term, TypingDerivation] = {}
        self.in_progress = set()
        self.names = itertools.count()

    # -- unification ------------------------------------------------------

    def meta(self) -> Meta:
        return Meta(next(self.ids))

    def resolve(self, t: Type) -> Type:
        while isinstance(t, Meta) and t.id in self.solution:
            t = self.solution[t.id]
        return t

    def zonk(self, t: Type) -> Type:
        t = self.resolve(t)
        if isinstance(t, Arrow):
            return Arrow(self.zonk(t.arg), self.zonk(t.res))
        if isinstance(t, TTensor):
            return TTensor(self.zonk(t.left), self.zonk(t.right))
        if isinstance(t, TBang):
            return TBang(self.zonk(t.body))
        if isinstance(t, TOmega):
            return TOmega(self.zonk(t.body))
        if isinstance(t, TForall):
            return TForall(t.var, self.zonk(t.body))
        return t

    def _occurs(self, m: Meta, t: Type) -> bool:
        t = self.resolve(t)
        if isinstance(t, Meta):
            return t.id == m.id
        if isinstance(t, Arrow):
            return self._occurs(m, t.arg) or self._occurs(m, t.res)
        if isinstance(t, TTensor):
            return self._occurs(m, t.left) or self._occurs(m, t.right)
        if isinstance(t, (TBang, TOmega, TForall)):
            return self._occurs(m, t.body)
        return False

    def unify(self, a: Type, b: Type):
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, Meta) or isinstance(b, Meta):
            m, other = (a, b) if isinstance(a, Meta) else (b, a)
            if self._occurs(m, other):
                raise TypingError(f"cyclic type {render_type(self.zonk(other))}")
            self.solution[m.id] = other
            return
        if type(a) is not type(b):
            raise TypingError(f"cannot match {render_type(self.zonk(a))} with {render_type(self.zonk(b))}")
        if isinstance(a, TVar):
            raise TypingError(f"cannot match {a.name} with {b.name}")
        if isinstance(a, Arrow):
            self.unify(a.arg, b.arg)
            self.unify(a.res, b.res)
        elif isinstance(a, TTensor):
            self.unify(a.left, b.left)
            self.unify(a.right, b.right)
        elif isinstance(a, (TBang, TOmega)):
            self.unify(a.body, b.body)
        elif isinstance(a, TForall):
            common = TVar(f"_e{next(self.names)}")
            self.unify(subst_type(a.body, {a.var: common}), subst_type(b.body, {b.var: common}))

    def attempt(self, *options):
        """First option that does not raise TypingError, undoing failed ones."""
        error = None
        for option in options:
            saved = dict(self.solution)
            try:
                return option()
            except TypingError as e:
                self.solution = saved
                error = e
        raise error

    # -- contexts ---------------------------------------------------------

    def _fresh(self, base: str, avoid) -> str:
        return fresh_name(base.rstrip("'") + "'", avoid)

    def trim(self, ctx: Mapping[str, Type], term: Term):
        kept = {x: t for x, t in ctx.items() if x in term.fv}
        dropped = []
        for x, t in ctx.items():
            if x in term.fv:
                continue
            t = self.resolve(t)
            if isinstance(t, Meta):
                self.unify(t, TBang(self.meta()))
                t = self.resolve(t)
            if not isinstance(t, TBang):
                raise TypingError(f"variable {x} : {render_type(self.zonk(t))} is never used")
            dropped.append((x, t))
        missing = term.fv - set(ctx)
        if missing:
            raise TypingError(f"undeclared variables {sorted(missing)}")

        def wrap(d: TypingDerivation) -> TypingDerivation:
            current = dict(d.context)
            for x, t in dropped:
                current[x] = t
                d = _node("w", (d,), current, d.term, d.type, (x, t))
            return d

        return kept, wrap

    def shared(self, ctx, term: Term, parts: Sequence[Term], go):
        """Derive term whose two parts share ctx variables, contracting them."""
        common = [x for x in ctx if x in parts[0].fv and x in parts[1].fv]
        if not common:
            return go(ctx, parts)
        x = common[0]
        t = self.resolve(ctx[x])
        if isinstance(t, Meta):
            self.unify(t, TBang(self.meta()))
            t = self.resolve(t)
        if not isinstance(t, TBang):
            raise TypingError(f"linear variable {x} : {render_type(self.zonk(t))} is used twice")
        avoid = set(ctx) | parts[0].fv | parts[1].fv | {x}
        y = self._fresh(x, avoid)
        z = self._fresh(y, avoid | {y})

        def orient(linear_side: int):
            def run():
                renamed = list(parts)
                renamed[linear_side] = rename_free(parts[linear_side], x, y)
                renamed[1 - linear_side] = rename_free(parts[1 - linear_side], x, z)
                inner = {k: v for k, v in ctx.items() if k != x}
                inner[y] = t.body
                inner[z] = t
                d = self.shared(inner, term, renamed, go)
                conclusion = {k: v for k, v in d.context if k not in (y, z)}
                conclusion[x] = t
                merged = substitute_term(d.term, {y: Variable(x), z: Variable(x)})
                return _node("b", (d,), conclusion, merged, d.type, (x, y, z))
            return run

        counts = [_count(p, x) for p in parts]
        order = (1, 0) if counts[0] > 1 and counts[1] == 1 else (0, 1)
        return self.attempt(orient(order[0]), orient(order[1]))

    # -- hints ------------------------------------------------------------

    def hinted(self, term: Term) -> Optional[TypingDerivation]:
        if term.fv or term in self.in_progress or term not in self.hints:
            return None
        if term not in self.hint_cache:
            self.in_progress.add(term)
            try:
                sub = _Checker(self.system, self.hints)
                sub.in_progress = self.in_progress
                self.hint_cache[term] = sub.finish(sub.check({}, term, self.hints[term]))
            finally:
                self.in_progress.discard(term)
        generic = self.hint_cache[term]
        mapping = {v: self.meta() for v in sorted(type_free_vars(generic.type))}
        return instantiate_derivation(generic, mapping)

    # -- derivation search ------------------------------------------------

    def instantiate(self, d: TypingDerivation) -> TypingDerivation:
        t = self.resolve(d.type)
        m = self.meta()
        return _node("forall-e", (d,), dict(d.context), d.term, subst_type(t.body, {t.var: m}), (m,))

    def coerce(self, d: TypingDerivation, expected: Type) -> TypingDerivation:
        expected = self.resolve(expected)
        while isinstance(self.resolve(d.type), TForall) and not isinstance(expected, (TForall, Meta)):
            d = self.instantiate(d)
        self.unify(d.type, expected)
        return d

    def deref(self, x: str, bang: TBang) -> TypingDerivation:
        y = self._fresh(x, {x})
        z = self._fresh(y, {x, y})
        ax = _node("ax", (), {y: bang.body}, Variable(y), bang.body)
        weak = _node("w", (ax,), {y: bang.body, z: bang}, Variable(y), bang.body, (z, bang))
        return _node("b", (weak,), {x: bang}, Variable(x), bang.body, (x, y, z))

    def check(self, ctx: Mapping[str, Type], term: Term, expected: Type) -> TypingDerivation:
        ctx, wrap = self.trim(ctx, term)
        return wrap(self._check(ctx, term, expected))

    def infer(self, ctx: Mapping[str, Type], term: Term) -> TypingDerivation:
        ctx, wrap = self.trim(ctx, term)
        return wrap(self._infer(ctx, term))

    def forall_intro(self, ctx, term, expected: TForall, inner) -> TypingDerivation:
        taken = set().union(*(type_free_vars(self.zonk(t)) for t in ctx.values())) if ctx else set()
        name = expected.var
        if name in taken:
            name = fresh_name(name, taken | type_names(expected.body))
        body = subst_type(expected.body, {expected.var: TVar(name)})
        d = inner(ctx, term, body)
        return _node("forall-i", (d,), ctx, term, TForall(name, d.type), (name,))

    def _check_var(self, ctx, term: Variable, expected: Type) -> TypingDerivation:
        have = self.resolve(ctx[term.name])
        expected = self.resolve(expected)
        options = [lambda: self._unify_ax(ctx, term, have, expected)]
        if isinstance(expected, TForall):
            options.append(lambda: self.forall_intro(ctx, term, expected, self._check_var))
        if isinstance(expected, TBang) and isinstance(have, TBang):
            def promote():
                d = self._check_var({term.name: have.body}, term, expected.body)
                return _node("fp", (d,), ctx, term, TBang(d.type))
            options.append(promote)
        if isinstance(have, TBang):
            def dereliction():
                y = self._fresh(term.name, set(ctx))
                z = self._fresh(y, set(ctx) | {y})
                d = self._check_var({y: have.body}, Variable(y), expected)
                weak = _node("w", (d,), {y: have.body, z: have}, Variable(y), d.type, (z, have))
                return _node("b", (weak,), ctx, term, d.type, (term.name, y, z))
            options.append(dereliction)
        if isinstance(have, TForall):
            options.append(lambda: self.coerce(_node("ax", (), ctx, term, have), expected))
        return self.attempt(*options)

    def _unify_ax(self, ctx, term, have, expected):
        self.unify(have, expected)
        return _node("ax", (), ctx, term, have)

    def _promote(self, ctx, term, expected: TBang) -> TypingDerivation:
        inner = {}
        for x, t in ctx.items():
            t = self.resolve(t)
            if isinstance(t, Meta):
                self.unify(t, TBang(self.meta()))
                t = self.resolve(t)
            if not isinstance(t, TBang):
                raise TypingError(f"cannot promote {render_term(term)}: {x} is not exponential")
            inner[x] = t.body
        d = self.check(inner, term, expected.body)
        return _node("fp", (d,), {x: TBang(t) for x, t in inner.items()}, term, TBang(d.type))

    def _check(self, ctx, term: Term, expected: Type) -> TypingDerivation:
        expected = self.resolve(expected)
        if isinstance(term, Variable):
            return self._check_var(ctx, term, expected)
        hinted = self.hinted(term)
        if isinstance(expected, TForall):
            if hinted is not None:
                return self.attempt(lambda: self.coerce(hinted, expected),
                                    lambda: self.forall_intro(ctx, term, expected, self._check))
            return self.forall_intro(ctx, term, expected, self._check)
        if isinstance(expected, TBang):
            promote = lambda: self._promote(ctx, term, expected)
            inferred = lambda: self.coerce(self._infer(ctx, term), expected)
            if isinstance(term, (Abs, Pair, Unit)):
                return promote()
            if all(isinstance(self.resolve(t), (TBang, Meta)) for t in ctx.values()):
                return self.attempt(promote, inferred)
            return inferred()
        if hinted is not None:
            return self.coerce(hinted, expected)
        if isinstance(term, Abs):
            if isinstance(expected, Meta):
                self.unify(expected, Arrow(self.meta(), self.meta()))
                expected = self.resolve(expected)
            if not isinstance(expected, Arrow):
                raise TypingError(f"abstraction {render_term(term)} checked against {render_type(self.zonk(expected))}")
            body = self.check({**ctx, term.var: expected.arg}, term.body, expected.res)
            return _node("lolli-i", (body,), ctx, term, Arrow(expected.arg, body.type), (term.var,))
        if isinstance(term, Pair):
            if isinstance(expected, Meta):
                self.unify(expected, TTensor(self.meta(), self.meta()))
                expected = self.resolve(expected)
            if not isinstance(expected, TTensor):
                raise TypingError(f"pair {render_term(term)} checked against {render_type(self.zonk(expected))}")

            def go(c, parts):
                left_ctx = {x: t for x, t in c.items() if x in parts[0].fv}
                right_ctx = {x: t for x, t in c.items() if x in parts[1].fv}
                dl = self.check(left_ctx, parts[0], expected.left)
                dr = self.check(right_ctx, parts[1], expected.right)
                return _node("tensor-i", (dl, dr), {**left_ctx, **right_ctx}, Pair(parts[0], parts[1]),
                             TTensor(dl.type, dr.type))

            return self.shared(ctx, term, (term.left, term.right), go)
        if isinstance(term, LetPair):
            return self._let_pair(ctx, term, expected)
        if isinstance(term, LetUnit):
            return self._let_unit(ctx, term, expected)
        return self.coerce(self._infer(ctx, term), expected)

    def _fresh_binders(self, ctx, term: LetPair) -> LetPair:
        clash = {term.first, term.second} & (set(ctx) | term.scrutinee.fv)
        if not clash:
            return term
        avoid = set(ctx) | term.fv | term.body.fv | {term.first, term.second}
        first, second, body = term.first, term.second, term.body
        if first in clash:
            first = self._fresh(first, avoid)
            avoid.add(first)
            body = rename_free(body, term.first, first)
        if second in clash:
            second = self._fresh(second, avoid)
            body = rename_free(body, term.second, second)
        return LetPair(term.scrutinee, first, second, body)

    def _let_pair(self, ctx, term: LetPair, expected: Optional[Type]) -> TypingDerivation:
        term = self._fresh_binders(ctx, term)

        def go(c, parts):
            scrut_ctx = {x: t for x, t in c.items() if x in parts[0].fv}
            body_ctx = {x: t for x, t in c.items() if x in parts[1].fv}
            first, second, body = parts[1].var, parts[1].body.var, parts[1].body.body
            ds = self.infer(scrut_ctx, parts[0])
            while isinstance(self.resolve(ds.type), TForall):
                ds = self.instantiate(ds)
            st = self.resolve(ds.type)
            if isinstance(st, Meta):
                self.unify(st, TTensor(self.meta(), self.meta()))
                st = self.resolve(st)
            if not isinstance(st, TTensor):
                raise TypingError(f"{render_term(parts[0])} : {render_type(self.zonk(st))} is not a pair")
            inner = {**body_ctx, first: st.left, second: st.right}
            db = self.check(inner, body, expected) if expected is not None else self.infer(inner, body)
            return _node("tensor-e", (ds, db), {**scrut_ctx, **body_ctx},
                         LetPair(parts[0], first, second, body), db.type, (first, second))

        # the body travels as \first. \second. body so that its free variables exclude the binders
        wrapped = Abs(term.first, Abs(term.second, term.body))
        return self.shared(ctx, term, (term.scrutinee, wrapped), go)

    def _let_unit(self, ctx, term: LetUnit, expected: Optional[Type]) -> TypingDerivation:
        def go(c, parts):
            scrut_ctx = {x: t for x, t in c.items() if x in parts[0].fv}
            body_ctx = {x: t for x, t in c.items() if x in parts[1].fv}
            ds = self.check(scrut_ctx, parts[0], TUNIT)
            db = self.check(body_ctx, parts[1], expected) if expected is not None else self.infer(body_ctx, parts[1])
            return _node("unit-e", (ds, db), {**scrut_ctx, **body_ctx}, LetUnit(parts[0], parts[1]), db.type)

        return self.shared(ctx, term, (term.scrutinee, term.body), go)

    def _infer_fun(self, ctx, f: Term) -> TypingDerivation:
        if isinstance(f, Variable):
            have = self.resolve(ctx[f.name])
            if isinstance(have, Meta):
                self.unify(have, Arrow(self.meta(), self.meta()))
                have = self.resolve(have)
            d = self.deref(f.name, have) if isinstance(have, TBang) else _node("ax", (), ctx, f, have)
        else:
            d = self.infer(ctx, f)
        while isinstance(self.resolve(d.type), TForall):
            d = self.instantiate(d)
        t = self.resolve(d.type)
        if isinstance(t, Meta):
            self.unify(t, Arrow(self.meta(), self.meta()))
        return d

    def _infer(self, ctx, term: Term) -> TypingDerivation:
        if isinstance(term, Variable):
            return _node("ax", (), ctx, term, ctx[term.name])
        hinted = self.hinted(term)
        if hinted is not None:
            return hinted
        if isinstance(term, Unit):
            return _node("unit-i", (), ctx, term, TUNIT)
        if isinstance(term, (Pop, Disc, Stream, FunctionStream)) and self.system != "nupta2":
            raise TypingError(f"{render_term(term)} needs streams, unavailable in {self.system}")
        if isinstance(term, Pop):
            s = self.meta()
            return _node("pop", (), ctx, term, Arrow(TOmega(s), TTensor(s, TOmega(s))))
        if isinstance(term, Disc):
            return _node("disc", (), ctx, term, Arrow(TOmega(self.meta()), TUNIT))
        if isinstance(term, FunctionStream):
            raise TypingError(f"stream {term.label} has infinitely many distinct calls")
        if isinstance(term, Stream):
            s = self.meta()
            premises = [self.check({}, call, s) for call in term.calls]
            return _node("stream", premises, ctx, term, TOmega(s))
        if isinstance(term, Abs):
            arg = self.meta()
            body = self.infer({**ctx, term.var: arg}, term.body)
            return _node("lolli-i", (body,), ctx, term, Arrow(arg, body.type), (term.var,))
        if isinstance(term, Pair):
            def go(c, parts):
                left_ctx = {x: t for x, t in c.items() if x in parts[0].fv}
                right_ctx = {x: t for x, t in c.items() if x in parts[1].fv}
                dl = self.infer(left_ctx, parts[0])
                dr = self.infer(right_ctx, parts[1])
                return _node("tensor-i", (dl, dr), {**left_ctx, **right_ctx}, Pair(parts[0], parts[1]),
                             TTensor(dl.type, dr.type))

            return self.shared(ctx, term, (term.left, term.right), go)
        if isinstance(term, LetPair):
            return self._let_pair(ctx, term, None)
        if isinstance(term, LetUnit):
            return self._let_unit(ctx, term, None)
        if isinstance(term, App):
            def go(c, parts):
                fun_ctx = {x: t for x, t in c.items() if x in parts[0].fv}
                arg_ctx = {x: t for x, t in c.items() if x in parts[1].fv}
                df = self._infer_fun(fun_ctx, parts[0])
                arrow = self.resolve(df.type)
                if not isinstance(arrow, Arrow):
                    raise TypingError(f"{render_term(parts[0])} : {render_type(self.zonk(arrow))} is not a function")
                da = self.check(arg_ctx, parts[1], arrow.arg)
                return _node("lolli-e", (df, da), {**fun_ctx, **arg_ctx}, App(parts[0], parts[1]), arrow.res)

            return self.shared(ctx, term, (term.fun, term.arg), go)
        raise TypingError(f"cannot type {render_term(term)}")

    # -- result -----------------------------------------------------------

    def finish(self, d: TypingDerivation) -> TypingDerivation:
        leftover: Dict[int, TVar] = {}

        def close(t: Type) -> Type:
            t = self.zonk(t)
            if isinstance(t, Meta):
                return leftover.setdefault(t.id, TVar(f"_t{t.id}"))
            if isinstance(t, Arrow):
                return Arrow(close(t.arg), close(t.res))
            if isinstance(t, TTensor):
                return TTensor(close(t.left), close(t.right))
            if isinstance(t, TBang):
                return TBang(close(t.body))
            if isinstance(t, TOmega):
                return TOmega(close(t.body))
            if isinstance(t, TForall):
                return TForall(t.var, close(t.body))
            return t

        return map_derivation_types(d, close)


def typecheck(term: Term, expected: Optional[Type] = None, system: str = "nupta2",
              context: Iterable[Tuple[str, Type]] = (), hints: Optional[Mapping[Term, Type]] = None
              ) -> TypingDerivation:
    """A validated derivation of context |- term : expected.

    With no expected type the checker infers one; unconstrained parts of
    the inferred type become fresh variables _tN.
    """
    checker = _Checker(system, hints)
    ctx = dict(context)
    d = checker.check(ctx, term, expected) if expected is not None else checker.infer(ctx, term)
    d = checker.finish(d)
    validate_derivation(d, system)
    if expected is not None and not type_alpha_eq(d.type, expected):
        raise TypingError(f"derived {render_type(d.type)} instead of {render_type(expected)}")
    logger.debug(f"Typed {render_term(term)[:60]} in {system} with {d.size()} rules")
    return d


def try_typecheck(term: Term, expected: Optional[Type] = None, system: str = "nupta2",
                  context: Iterable[Tuple[str, Type]] = (), hints: Optional[Mapping[Term, Type]] = None
                  ) -> Tuple[Optional[TypingDerivation], Optional[str]]:
    try:
        return typecheck(term, expected, system, context, hints), None
    except TypingError as e:
        return None, str(e)


# ---------------------------------------------------------------------------
# Subject reduction
# ---------------------------------------------------------------------------

_PASS_THROUGH = ("w", "b", "fp", "forall-i", "forall-e")


def _make(rule: str, premises: Sequence[TypingDerivation], data: tuple = (), selector=None) -> TypingDerivation:
    """A node of rule over premises, with its context, term and type computed from them."""
    ps = tuple(premises)
    if rule == "unit-i":
        return TypingDerivation(rule, (), (), UNIT, TUNIT)
    if rule == "stream":
        return TypingDerivation(rule, ps, (), Stream(tuple(p.term for p in ps), selector), TOmega(ps[0].type))
    ctx = dict(ps[0].context)
    if rule == "lolli-i":
        (x,) = data
        arg = ctx.pop(x)
        term, ty = Abs(x, ps[0].term), Arrow(arg, ps[0].type)
    elif rule == "lolli-e":
        ctx.update(ps[1].context)
        term, ty = App(ps[0].term, ps[1].term), ps[0].type.res
    elif rule == "tensor-i":
        ctx.update(ps[1].context)
        term, ty = Pair(ps[0].term, ps[1].term), TTensor(ps[0].type, ps[1].type)
    elif rule == "tensor-e":
        x, y = data
        body = dict(ps[1].context)
        del body[x], body[y]
        ctx.update(body)
        term, ty = LetPair(ps[0].term, x, y, ps[1].term), ps[1].type
    elif rule == "unit-e":
        ctx.update(ps[1].context)
        term, ty = LetUnit(ps[0].term, ps[1].term), ps[1].type
    elif rule == "forall-i":
        term, ty = ps[0].term, TForall(data[0], ps[0].type)
    elif rule == "forall-e":
        general = ps[0].type
        term, ty = ps[0].term, subst_type(general.body, {general.var: data[0]})
    elif rule == "fp":
        ctx = {x: TBang(s) for x, s in ctx.items()}
        term, ty = ps[0].term, TBang(ps[0].type)
    elif rule == "w":
        x, weakened = data
        ctx[x] = weakened
        term, ty = ps[0].term, ps[0].type
    elif rule == "b":
        x, y, z = data
        ctx.pop(y)
        ctx[x] = ctx.pop(z)
        term, ty = substitute_term(ps[0].term, {y: Variable(x), z: Variable(x)}), ps[0].type
    else:
        raise TypingError(f"cannot rebuild a {rule} node")
    return _node(rule, ps, ctx, term, ty, data)


def _rebuild(d: TypingDerivation, premises: Sequence[TypingDerivation], data: Optional[tuple] = None) -> TypingDerivation:
    if not d.premises:
        return d
    selector = d.term.selector if d.rule == "stream" else None
    return _make(d.rule, premises, d.data if data is None else tuple(data), selector)


def _rename_vars(d: TypingDerivation, mapping: Mapping[str, str]) -> TypingDerivation:
    """d with free term variables renamed; targets must not be bound inside d."""
    names = {x for x, _ in d.context}
    mapping = {k: v for k, v in mapping.items() if k in names and k != v}
    if not mapping:
        return d
    if d.rule == "ax":
        ((x, t),) = d.context
        return TypingDerivation("ax", (), ((mapping[x], t),), Variable(mapping[x]), d.type)
    data = d.data
    if d.rule in ("w", "b") and data[0] in mapping:
        data = (mapping[data[0]],) + tuple(data[1:])
    return _rebuild(d, [_rename_vars(p, mapping) for p in d.premises], data)


def _names(d: TypingDerivation) -> set:
    return {x for node in d.walk() for x, _ in node.context}


def _rewrap(d: TypingDerivation, wrappers: Sequence[TypingDerivation]) -> TypingDerivation:
    for wrapper in reversed(wrappers):
        d = _rebuild(wrapper, [d])
    return d


def _peel(d: TypingDerivation) -> Tuple[TypingDerivation, List[TypingDerivation]]:
    """The first node below the w and b rules at the root, and those rules outermost first."""
    wrappers = []
    while d.rule in ("w", "b"):
        wrappers.append(d)
        d = d.premises[0]
    return d, wrappers


class _Reducer:
    """Builds the derivation of a reduct from the derivation of the redex.

    Substituting D2 (for N) for x in D1 follows the rule that introduces x
    in D1: an axiom is replaced by D2, a weakening discards D2 with its
    !-context, an absorption duplicates a promotion D2, and a promotion
    moves a promotion D2 inside itself.
    """

    def __init__(self, *derivations: TypingDerivation):
        self.used = set().union(*(_names(d) for d in derivations))

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self.used)
        self.used.add(name)
        return name

    def freshen(self, d: TypingDerivation, avoid: set) -> TypingDerivation:
        """d with every variable bound inside it renamed away from avoid."""
        premises = [self.freshen(p, avoid) for p in d.premises]
        data = list(d.data)
        bound = {"lolli-i": ((0, 0),), "tensor-e": ((0, 1), (1, 1)), "b": ((1, 0), (2, 0))}
        for slot, k in bound.get(d.rule, ()):
            if data[slot] in avoid:
                new = self.fresh(data[slot])
                premises[k] = _rename_vars(premises[k], {data[slot]: new})
                data[slot] = new
        if tuple(data) == d.data and all(p is q for p, q in zip(premises, d.premises)):
            return d
        return _rebuild(d, premises, tuple(data))

    def substitute(self, d1: TypingDerivation, x: str, d2: TypingDerivation) -> TypingDerivation:
        """A derivation of d1's judgement with x replaced by the term of d2."""
        own = dict(d1.context)
        if x not in own:
            raise TypingError(f"{x} is not declared in {d1.judgement()}")
        if not type_alpha_eq(own[x], d2.type):
            raise TypingError(f"{x}: {render_type(own[x])} cannot take {render_term(d2.term)} : {render_type(d2.type)}")
        incoming = {n for n, _ in d2.context}
        shared = (set(own) - {x}) & incoming
        if shared:
            raise TypingError(f"substitution would share {sorted(shared)}")
        d1 = self.freshen(d1, _names(d2))
        if x in incoming:
            new = self.fresh(x)
            d1, x = _rename_vars(d1, {x: new}), new
        return self._into(d1, x, d2)

    def _into(self, d1: TypingDerivation, x: str, d2: TypingDerivation) -> TypingDerivation:
        rule = d1.rule
        if d2.rule == "ax":
            ((name, _),) = d2.context
            return _rename_vars(d1, {x: name})
        if rule == "ax":
            return d2
        if rule == "w" and d1.data[0] == x:
            result = d1.premises[0]
            for name, t in d2.context:
                if not isinstance(t, TBang):
                    raise TypingError(f"cannot discard {render_term(d2.term)}: {name} is linear")
                result = _make("w", [result], (name, t))
            return result
        if rule == "b" and d1.data[0] == x:
            return self._duplicate(d1, d2)
        if rule == "fp":
            core, wrappers = _peel(d2)
            if core.rule == "ax":
                ((name, _),) = core.context
                return _rewrap(_rename_vars(d1, {x: name}), wrappers)
            if core.rule != "fp":
                raise TypingError(f"cannot move {render_term(d2.term)} into a promotion")
            return _rewrap(_make("fp", [self._into(d1.premises[0], x, core.premises[0])]), wrappers)
        if rule == "forall-i":
            (var,) = d1.data
            premise = d1.premises[0]
            if any(var in type_free_vars(t) for _, t in d2.context):
                taken = set(type_names(d1.type)).union(*(type_names(t) for _, t in d1.context + d2.context))
                new = fresh_name(var, taken | {var})
                premise = instantiate_derivation(premise, {var: TVar(new)})
                return _make("forall-i", [self._into(premise, x, d2)], (new,))
            return _rebuild(d1, [self._into(premise, x, d2)])
        if rule in ("lolli-i", "forall-e", "w", "b"):
            return _rebuild(d1, [self._into(d1.premises[0], x, d2)])
        if rule in ("lolli-e", "tensor-i", "tensor-e", "unit-e"):
            premises = list(d1.premises)
            k = next(k for k, p in enumerate(premises) if x in dict(p.context))
            premises[k] = self._into(premises[k], x, d2)
            return _rebuild(d1, premises)
        raise TypingError(f"{rule} does not declare {x}")

    def _duplicate(self, d1: TypingDerivation, d2: TypingDerivation) -> TypingDerivation:
        x, y, z = d1.data
        core, wrappers = _peel(d2)
        if core.rule == "ax":
            ((name, _),) = core.context
            return _rewrap(_rename_vars(d1, {x: name}), wrappers)
        if core.rule != "fp":
            raise TypingError(f"cannot duplicate {render_term(d2.term)}: it is not a promotion")
        linear = {n: self.fresh(n) for n, _ in core.context}
        banged = {n: self.fresh(n) for n, _ in core.context}
        body = self._into(d1.premises[0], y, _rename_vars(core.premises[0], linear))
        body = self._into(body, z, _rename_vars(core, banged))
        for n, _ in core.context:
            body = _make("b", [body], (n, linear[n], banged[n]))
        return _rewrap(body, wrappers)

    def value(self, d: TypingDerivation) -> Tuple[TypingDerivation, List[TypingDerivation]]:
        """The introduction rule giving d's term, below w, b and instantiated generalizations."""
        wrappers: List[TypingDerivation] = []
        while True:
            if d.rule in ("w", "b"):
                wrappers.append(d)
                d = d.premises[0]
            elif d.rule == "forall-e":
                general, inner = self.value(d.premises[0])
                if general.rule != "forall-i":
                    return d, wrappers
                wrappers.extend(inner)
                d = instantiate_derivation(general.premises[0], {general.data[0]: d.data[0]})
            else:
                return d, wrappers

    def reduce(self, d: TypingDerivation, position: Tuple[int, ...]) -> TypingDerivation:
        if d.rule in _PASS_THROUGH:
            return _rebuild(d, [self.reduce(d.premises[0], position)])
        if position:
            premises = list(d.premises)
            k = 0 if d.rule == "lolli-i" else position[0]
            premises[k] = self.reduce(premises[k], position[1:])
            return _rebuild(d, premises)
        return self.contract(d)

    def contract(self, d: TypingDerivation) -> TypingDerivation:
        kind = redex_kind(d.term)
        if kind in ("beta", "pop", "disc", "let-pair", "let-unit"):
            left, right = d.premises
            head, outer = self.value(self.freshen(left, _names(right)))
        if kind == "beta":
            if head.rule != "lolli-i":
                raise TypingError(f"{render_term(d.term.fun)} is not typed by an abstraction")
            return _rewrap(self.substitute(head.premises[0], head.data[0], right), outer)
        if kind == "let-pair":
            if head.rule != "tensor-i":
                raise TypingError(f"{render_term(d.term.scrutinee)} is not typed as a pair")
            first, second = d.data
            for name in {first, second} & _names(left):
                new = self.fresh(name)
                right = _rename_vars(right, {name: new})
                first, second = (new if n == name else n for n in (first, second))
            body = self.substitute(right, first, head.premises[0])
            return _rewrap(self.substitute(body, second, head.premises[1]), outer)
        if kind == "let-unit":
            if head.rule != "unit-i":
                raise TypingError(f"{render_term(d.term.scrutinee)} is not typed by the unit rule")
            return _rewrap(right, outer)
        if kind in ("pop", "disc"):
            stream, inner = self.value(right)
            if head.rule != kind or stream.rule != "stream":
                raise TypingError(f"{render_term(d.term)} is not typed by the {kind} and stream rules")
            if kind == "disc":
                result = _make("unit-i", [])
            else:
                sel = stream.term.selector
                tail = _make("stream", stream.premises, (), sel.shift(1))
                result = _make("tensor-i", [stream.premises[sel.at(0)], tail])
            return _rewrap(_rewrap(result, inner), outer)
        raise TypingError(f"no redex at the root of {render_term(d.term)}")


def reduce_derivation(d: TypingDerivation, position: Sequence[int]) -> TypingDerivation:
    """The derivation d rewritten along the contraction of the redex at position."""
    return _Reducer(d).reduce(d, tuple(position))


def subject_reduction_check(d: TypingDerivation, reduct: Term, system: str = "nupta2") -> TypingDerivation:
    """Derivation of the same judgement for a one-step reduct of d's term.

    The new derivation is obtained from d by reduce_derivation, never by a
    fresh search, and is validated before it is returned.
    """
    validate_derivation(d, system)
    positions = [p for p, _ in redexes(d.term) if alpha_equal(reduce_at(d.term, p), reduct)]
    if not positions:
        raise PreconditionError(f"{render_term(reduct)} is not a one-step reduct of {render_term(d.term)}")
    error = None
    for position in positions:
        try:
            reduced = validate_derivation(reduce_derivation(d, position), system)
        except TypingError as e:
            error = e
            continue
        if not (_same_ctx(dict(reduced.context), dict(d.context)) and type_alpha_eq(reduced.type, d.type)):
            error = TypingError(f"{reduced.judgement()} does not match {d.judgement()}")
            continue
        order = [x for x, _ in d.context]
        context = tuple(sorted(reduced.context, key=lambda entry: order.index(entry[0])))
        reduced = TypingDerivation(reduced.rule, reduced.premises, context, reduced.term, reduced.type, reduced.data)
        logger.debug(f"Subject reduction at {list(position)}: {d.size()} -> {reduced.size()} rules")
        return reduced
    raise TypingError(f"subject reduction failed for {render_term(reduct)}: {str(error)}")
