#!/usr/bin/env python3
"""
Linear lambda terms with streams.

    M ::= x | I | let I = M in M | M * M | let x*y = M in M
        | \\x. M | M M | stream [M, ...] selector ... | pop | disc

A stream carries a finite list of distinct calls and a Selector choosing
the call at every index; pop hands out the selected head and the shifted
tail, disc throws the stream away. Reduction is leftmost-outermost.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from lark import Lark, Transformer
from lark.exceptions import LarkError, UnexpectedInput

from selector import Selector
from syntax import ParseError, StepLimitExceeded, fresh_name

# Set up logging
logger = logging.getLogger(__name__)

DEFAULT_BETA_CAP = 10**7


class Term:
    """Base of the term constructors.

    Every constructor caches its free variables and a structural hash at
    construction time, so equality and substitution never rescan subterms
    that cannot be affected.
    """

    fv: FrozenSet[str]
    _key: int

    def children(self) -> Tuple["Term", ...]:
        return ()

    def __hash__(self):
        return self._key

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._key != other._key:
            return False
        return all(getattr(self, f.name) == getattr(other, f.name) for f in fields(self) if f.init)

    def __str__(self):
        return render(self)


def _seal(term: Term, fv, *key):
    object.__setattr__(term, "fv", frozenset(fv))
    object.__setattr__(term, "_key", hash((type(term).__name__,) + key))


@dataclass(frozen=True, eq=False)
class Variable(Term):
    name: str
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, (self.name,), self.name)


@dataclass(frozen=True, eq=False)
class Unit(Term):
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, ())


@dataclass(frozen=True, eq=False)
class LetUnit(Term):
    """let I = scrutinee in body"""

    scrutinee: Term
    body: Term
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, self.scrutinee.fv | self.body.fv, self.scrutinee._key, self.body._key)

    def children(self):
        return (self.scrutinee, self.body)


@dataclass(frozen=True, eq=False)
class Pair(Term):
    left: Term
    right: Term
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, self.left.fv | self.right.fv, self.left._key, self.right._key)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class LetPair(Term):
    """let first*second = scrutinee in body"""

    scrutinee: Term
    first: str
    second: str
    body: Term
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        bound = self.body.fv - {self.first, self.second}
        _seal(self, self.scrutinee.fv | bound, self.scrutinee._key, self.first, self.second, self.body._key)

    def children(self):
        return (self.scrutinee, self.body)


@dataclass(frozen=True, eq=False)
class Abs(Term):
    var: str
    body: Term
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, self.body.fv - {self.var}, self.var, self.body._key)

    def children(self):
        return (self.body,)


@dataclass(frozen=True, eq=False)
class App(Term):
    fun: Term
    arg: Term
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, self.fun.fv | self.arg.fv, self.fun._key, self.arg._key)

    def children(self):
        return (self.fun, self.arg)


@dataclass(frozen=True, eq=False)
class Stream(Term):
    """The stream i -> calls[selector.at(i)]."""

    calls: Tuple[Term, ...]
    selector: Selector
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "calls", tuple(self.calls))
        free = frozenset().union(*(c.fv for c in self.calls)) if self.calls else frozenset()
        _seal(self, free, tuple(c._key for c in self.calls), self.selector)

    def children(self):
        return self.calls

    def head(self) -> Term:
        return self.calls[self.selector.at(0)]

    def tail(self) -> "Stream":
        return Stream(self.calls, self.selector.shift(1))

    def take(self, n: int) -> List[Term]:
        return [self.calls[k] for k in self.selector.take(n)]


@dataclass(frozen=True, eq=False)
class FunctionStream(Term):
    """A stream whose i-th element is generator(offset + i).

    Its elements need not range over finitely many terms, so it reduces
    like any stream but is never typable.
    """

    generator: Callable[[int], Term]
    label: str
    offset: int = 0
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, (), self.label, self.offset)

    def head(self) -> Term:
        return self.generator(self.offset)

    def tail(self) -> "FunctionStream":
        return FunctionStream(self.generator, self.label, self.offset + 1)

    def take(self, n: int) -> List[Term]:
        return [self.generator(self.offset + i) for i in range(n)]


@dataclass(frozen=True, eq=False)
class Pop(Term):
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, ())


@dataclass(frozen=True, eq=False)
class Disc(Term):
    fv: FrozenSet[str] = field(init=False, repr=False, default=frozenset())
    _key: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        _seal(self, ())


UNIT = Unit()
POP = Pop()
DISC = Disc()
STREAMS = (Stream, FunctionStream)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def var(name: str) -> Variable:
    return Variable(name)


def lam(names: Iterable[str], body: Term) -> Term:
    """\\x1. ... \\xn. body"""
    for name in reversed(list(names)):
        body = Abs(name, body)
    return body


def apply(fun: Term, *args: Term) -> Term:
    for a in args:
        fun = App(fun, a)
    return fun


def tuple_term(*items: Term) -> Term:
    """M1 * ... * Mn, nested to the left."""
    if not items:
        return UNIT
    result = items[0]
    for item in items[1:]:
        result = Pair(result, item)
    return result


def let_tuple(scrutinee: Term, names: Sequence[str], body: Term) -> Term:
    """let x1*...*xn = scrutinee in body, for the left-nested tuple of tuple_term."""
    names = list(names)
    if len(names) == 1:
        return substitute(body, {names[0]: scrutinee})
    if len(names) == 2:
        return LetPair(scrutinee, names[0], names[1], body)
    avoid = set(names) | body.fv | scrutinee.fv
    rest = fresh_name("t", avoid)
    return LetPair(scrutinee, rest, names[-1], let_tuple(Variable(rest), names[:-1], body))


def compose(*functions: Term) -> Term:
    """\\z. f1 (f2 (... (fn z)))"""
    avoid = set().union(*(f.fv for f in functions)) if functions else set()
    z = fresh_name("z", avoid)
    body: Term = Variable(z)
    for f in reversed(functions):
        body = App(f, body)
    return Abs(z, body)


def identity() -> Term:
    return Abs("z", Variable("z"))


def term_size(t: Term) -> int:
    size = 0
    stack = [t]
    while stack:
        node = stack.pop()
        size += 1
        stack.extend(node.children())
    return size


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def _bind(names: Tuple[str, ...], body: Term, mapping: Dict[str, Term]) -> Tuple[Tuple[str, ...], Term]:
    inner = {x: n for x, n in mapping.items() if x not in names and x in body.fv}
    if not inner:
        return names, body
    danger = set().union(*(n.fv for n in inner.values()))
    clash = [x for x in names if x in danger]
    if not clash:
        return names, substitute(body, inner)
    avoid = danger | set(body.fv) | set(inner) | set(names)
    renamed = []
    for x in names:
        if x in danger:
            new = fresh_name(x, avoid)
            avoid.add(new)
            inner[x] = Variable(new)
            renamed.append(new)
        else:
            renamed.append(x)
    return tuple(renamed), substitute(body, inner)


def substitute(t: Term, mapping: Dict[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution t[N1/x1, ..., Nn/xn]."""
    mapping = {x: n for x, n in mapping.items() if x in t.fv}
    if not mapping:
        return t
    if isinstance(t, Variable):
        return mapping[t.name]
    if isinstance(t, Abs):
        (x,), body = _bind((t.var,), t.body, mapping)
        return Abs(x, body)
    if isinstance(t, LetPair):
        (x, y), body = _bind((t.first, t.second), t.body, mapping)
        return LetPair(substitute(t.scrutinee, mapping), x, y, body)
    if isinstance(t, App):
        return App(substitute(t.fun, mapping), substitute(t.arg, mapping))
    if isinstance(t, Pair):
        return Pair(substitute(t.left, mapping), substitute(t.right, mapping))
    if isinstance(t, LetUnit):
        return LetUnit(substitute(t.scrutinee, mapping), substitute(t.body, mapping))
    if isinstance(t, Stream):
        return Stream(tuple(substitute(c, mapping) for c in t.calls), t.selector)
    return t


def rename_free(t: Term, old: str, new: str) -> Term:
    return substitute(t, {old: Variable(new)})


# ---------------------------------------------------------------------------
# Alpha-equivalence
# ---------------------------------------------------------------------------

def _alpha(a: Term, b: Term, ea: Dict[str, int], eb: Dict[str, int], depth: int) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Variable):
        return ea.get(a.name, a.name) == eb.get(b.name, b.name)
    if isinstance(a, Abs):
        return _alpha(a.body, b.body, {**ea, a.var: depth}, {**eb, b.var: depth}, depth + 1)
    if isinstance(a, LetPair):
        return (_alpha(a.scrutinee, b.scrutinee, ea, eb, depth)
                and _alpha(a.body, b.body, {**ea, a.first: depth, a.second: depth + 1},
                           {**eb, b.first: depth, b.second: depth + 1}, depth + 2))
    if isinstance(a, Stream):
        return (a.selector == b.selector and len(a.calls) == len(b.calls)
                and all(_alpha(x, y, ea, eb, depth) for x, y in zip(a.calls, b.calls)))
    if isinstance(a, FunctionStream):
        return a == b
    return all(_alpha(x, y, ea, eb, depth) for x, y in zip(a.children(), b.children()))


def alpha_equal(a: Term, b: Term) -> bool:
    return a == b or _alpha(a, b, {}, {}, 0)


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------

def contract(t: Term) -> Optional[Term]:
    """The reduct of t when t itself is a redex."""
    if isinstance(t, App):
        if isinstance(t.fun, Abs):
            return substitute(t.fun.body, {t.fun.var: t.arg})
        if isinstance(t.fun, Pop) and isinstance(t.arg, STREAMS):
            return Pair(t.arg.head(), t.arg.tail())
        if isinstance(t.fun, Disc) and isinstance(t.arg, STREAMS):
            return UNIT
    elif isinstance(t, LetPair) and isinstance(t.scrutinee, Pair):
        return substitute(t.body, {t.first: t.scrutinee.left, t.second: t.scrutinee.right})
    elif isinstance(t, LetUnit) and isinstance(t.scrutinee, Unit):
        return t.body
    return None


def redex_kind(t: Term) -> Optional[str]:
    if isinstance(t, App):
        if isinstance(t.fun, Abs):
            return "beta"
        if isinstance(t.fun, Pop) and isinstance(t.arg, STREAMS):
            return "pop"
        if isinstance(t.fun, Disc) and isinstance(t.arg, STREAMS):
            return "disc"
    if isinstance(t, LetPair) and isinstance(t.scrutinee, Pair):
        return "let-pair"
    if isinstance(t, LetUnit) and isinstance(t.scrutinee, Unit):
        return "let-unit"
    return None


def _with_child(t: Term, k: int, new: Term) -> Term:
    if isinstance(t, App):
        return App(new, t.arg) if k == 0 else App(t.fun, new)
    if isinstance(t, Pair):
        return Pair(new, t.right) if k == 0 else Pair(t.left, new)
    if isinstance(t, LetPair):
        return replace(t, scrutinee=new) if k == 0 else replace(t, body=new)
    if isinstance(t, LetUnit):
        return LetUnit(new, t.body) if k == 0 else LetUnit(t.scrutinee, new)
    if isinstance(t, Abs):
        return Abs(t.var, new)
    if isinstance(t, Stream):
        calls = list(t.calls)
        calls[k] = new
        return Stream(tuple(calls), t.selector)
    raise TypeError(f"{type(t).__name__} has no children")


def beta_step(t: Term) -> Optional[Term]:
    """One leftmost-outermost step, or None when t is normal."""
    reduct = contract(t)
    if reduct is not None:
        return reduct
    for k, child in enumerate(t.children()):
        new = beta_step(child)
        if new is not None:
            return _with_child(t, k, new)
    return None


def redexes(t: Term, position: Tuple[int, ...] = ()) -> Iterator[Tuple[Tuple[int, ...], str]]:
    kind = redex_kind(t)
    if kind is not None:
        yield position, kind
    for k, child in enumerate(t.children()):
        yield from redexes(child, position + (k,))


def reduce_at(t: Term, position: Sequence[int]) -> Term:
    if not position:
        reduct = contract(t)
        if reduct is None:
            raise ValueError(f"no redex at the root of {render(t)}")
        return reduct
    k = position[0]
    return _with_child(t, k, reduce_at(t.children()[k], position[1:]))


def one_step_reducts(t: Term) -> List[Term]:
    return [reduce_at(t, p) for p, _ in redexes(t)]


class _Normalizer:
    """Normal-order evaluation counting every contraction."""

    def __init__(self, cap: int):
        self.cap = cap
        self.steps = 0
        self.kinds: Dict[str, int] = {}

    def _tick(self, kind: str):
        self.steps += 1
        self.kinds[kind] = self.kinds.get(kind, 0) + 1
        if self.steps > self.cap:
            raise StepLimitExceeded(f"beta-reduction did not finish within {self.cap} steps", self.steps)

    def whnf(self, t: Term) -> Term:
        while True:
            if isinstance(t, App):
                f = self.whnf(t.fun)
                if isinstance(f, Abs):
                    self._tick("beta")
                    t = substitute(f.body, {f.var: t.arg})
                    continue
                if isinstance(f, (Pop, Disc)):
                    a = self.whnf(t.arg)
                    if isinstance(a, STREAMS):
                        self._tick("pop" if isinstance(f, Pop) else "disc")
                        t = contract(App(f, a))
                        continue
                    return App(f, a)
                return t if f is t.fun else App(f, t.arg)
            if isinstance(t, LetPair):
                s = self.whnf(t.scrutinee)
                if isinstance(s, Pair):
                    self._tick("let-pair")
                    t = substitute(t.body, {t.first: s.left, t.second: s.right})
                    continue
                return t if s is t.scrutinee else replace(t, scrutinee=s)
            if isinstance(t, LetUnit):
                s = self.whnf(t.scrutinee)
                if isinstance(s, Unit):
                    self._tick("let-unit")
                    t = t.body
                    continue
                return t if s is t.scrutinee else LetUnit(s, t.body)
            return t

    def normal(self, t: Term) -> Term:
        t = self.whnf(t)
        if isinstance(t, Abs):
            return Abs(t.var, self.normal(t.body))
        if isinstance(t, App):
            return App(self.normal(t.fun), self.normal(t.arg))
        if isinstance(t, Pair):
            return Pair(self.normal(t.left), self.normal(t.right))
        if isinstance(t, LetPair):
            return replace(t, scrutinee=self.normal(t.scrutinee), body=self.normal(t.body))
        if isinstance(t, LetUnit):
            return LetUnit(self.normal(t.scrutinee), self.normal(t.body))
        if isinstance(t, Stream):
            return Stream(tuple(self.normal(c) for c in t.calls), t.selector)
        return t


@dataclass
class BetaResult:
    term: Term
    steps: int
    kinds: Dict[str, int]

    def to_json(self) -> dict:
        return {"normal_form": render(self.term), "steps": self.steps, "kinds": dict(self.kinds)}


def beta_reduce(t: Term, cap: int = DEFAULT_BETA_CAP) -> BetaResult:
    """Normal form of t with the number of contractions it took."""
    n = _Normalizer(cap)
    result = n.normal(t)
    logger.debug(f"Beta-normalized in {n.steps} steps")
    return BetaResult(result, n.steps, n.kinds)


def beta_normalize(t: Term, cap: int = DEFAULT_BETA_CAP) -> Term:
    return beta_reduce(t, cap).term


def reduction_sequence(t: Term, cap: int = DEFAULT_BETA_CAP) -> Iterator[Term]:
    """t and every term of its leftmost-outermost reduction sequence."""
    yield t
    steps = 0
    while True:
        t = beta_step(t)
        if t is None:
            return
        steps += 1
        if steps > cap:
            raise StepLimitExceeded(f"reduction sequence exceeded {cap} steps", steps)
        yield t


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_BINDER, _PAIR, _APP, _ATOM = 0, 1, 2, 3


def _selector_text(sel: Selector) -> str:
    if sel.is_table:
        return f"selector table=[{', '.join(map(str, sel.table))}]"
    text = f"selector period=[{', '.join(map(str, sel.period))}]"
    if sel.prefix:
        text = f"selector prefix=[{', '.join(map(str, sel.prefix))}] " + text[len("selector "):]
    return text


def _render(t: Term, level: int) -> str:
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, Unit):
        return "I"
    if isinstance(t, Pop):
        return "pop"
    if isinstance(t, Disc):
        return "disc"
    if isinstance(t, FunctionStream):
        return f"<{t.label}+{t.offset}>"
    if isinstance(t, Stream):
        text = f"stream [{', '.join(_render(c, _BINDER) for c in t.calls)}] {_selector_text(t.selector)}"
        return f"({text})" if level > _BINDER else text
    if isinstance(t, Abs):
        names = [t.var]
        body = t.body
        while isinstance(body, Abs):
            names.append(body.var)
            body = body.body
        text, own = f"\\{' '.join(names)}. {_render(body, _BINDER)}", _BINDER
    elif isinstance(t, LetPair):
        text = f"let {t.first}*{t.second} = {_render(t.scrutinee, _BINDER)} in {_render(t.body, _BINDER)}"
        own = _BINDER
    elif isinstance(t, LetUnit):
        text = f"let I = {_render(t.scrutinee, _BINDER)} in {_render(t.body, _BINDER)}"
        own = _BINDER
    elif isinstance(t, Pair):
        text, own = f"{_render(t.left, _PAIR)} * {_render(t.right, _APP)}", _PAIR
    elif isinstance(t, App):
        text, own = f"{_render(t.fun, _APP)} {_render(t.arg, _ATOM)}", _APP
    else:
        raise TypeError(f"not a term: {t!r}")
    return f"({text})" if own < level else text


def render(t: Term) -> str:
    return _render(t, _BINDER)


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

TERM_GRAMMAR = r"""
?term: ("\\" | "λ") NAME+ "." term                 -> abs
     | "let" NAME "*" NAME "=" term "in" term      -> let_pair
     | "let" "I" "=" term "in" term                -> let_unit
     | pair_term

?pair_term: pair_term "*" app_term                 -> pair
          | app_term

?app_term: app_term atom                           -> app
         | atom

?atom: NAME                                        -> variable
     | "I"                                         -> unit
     | "pop"                                       -> pop
     | "disc"                                      -> disc
     | "stream" "[" term ("," term)* "]" [selector] -> stream
     | "(" term ")"

selector: "selector" selector_field+
selector_field: "prefix" "=" int_list              -> prefix
              | "period" "=" int_list              -> period
              | "table" "=" int_list               -> table
int_list: "[" [INT ("," INT)*] "]"

NAME: /(?!(let|in|pop|disc|stream|selector|prefix|period|table)\b)[a-z_][A-Za-z0-9_']*/

%import common.INT
%import common.WS
%ignore WS
"""


class TermBuilder(Transformer):
    """Turns term parse trees into Term values."""

    def abs(self, args):
        *names, body = args
        return lam([str(n) for n in names], body)

    def let_pair(self, args):
        x, y, scrutinee, body = args
        return LetPair(scrutinee, str(x), str(y), body)

    def let_unit(self, args):
        return LetUnit(args[0], args[1])

    def pair(self, args):
        return Pair(args[0], args[1])

    def app(self, args):
        return App(args[0], args[1])

    def variable(self, args):
        return Variable(str(args[0]))

    def unit(self, args):
        return UNIT

    def pop(self, args):
        return POP

    def disc(self, args):
        return DISC

    def int_list(self, args):
        return [int(a) for a in args if a is not None]

    def prefix(self, args):
        return ("prefix", args[0])

    def period(self, args):
        return ("period", args[0])

    def table(self, args):
        return ("table", args[0])

    def selector(self, args):
        return dict(args)

    def stream(self, args):
        *calls, sel_args = args
        calls = [c for c in calls if c is not None]
        if sel_args is None:
            selector = Selector.periodic(len(calls), (), tuple(range(len(calls))))
        elif "table" in sel_args:
            selector = Selector.from_table(len(calls), sel_args["table"])
        else:
            selector = Selector.periodic(len(calls), sel_args.get("prefix", []), sel_args.get("period", [0]))
        problems = selector.check()
        if problems:
            raise ParseError("stream: " + "; ".join(problems))
        return Stream(tuple(calls), selector)


_term_parser = Lark(TERM_GRAMMAR, start="term", parser="lalr")


def parse_term(text: str) -> Term:
    try:
        tree = _term_parser.parse(text)
    except UnexpectedInput as e:
        raise ParseError(f"syntax error: {str(e).splitlines()[0]}", e.line, e.column) from None
    except LarkError as e:
        raise ParseError(f"syntax error: {str(e)}") from None
    try:
        return TermBuilder().transform(tree)
    except LarkError as e:
        cause = getattr(e, "orig_exc", e)
        if isinstance(cause, ParseError):
            raise cause from None
        raise ParseError(f"malformed term: {str(cause)}") from None
