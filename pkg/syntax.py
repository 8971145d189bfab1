#!/usr/bin/env python3
"""
Formulas and sequents of second-order multiplicative-exponential linear logic.

Provides the formula datatypes, linear negation, capture-avoiding substitution,
alpha-equivalence through a canonical de Bruijn form, the textual grammar for
formulas and sequents, and a constructor-tagged JSON export.

Also hosts the exception hierarchy shared by every module of the toolkit.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from lark import Lark, Transformer
from lark.exceptions import LarkError, UnexpectedCharacters, UnexpectedInput

# Set up logging
logger = logging.getLogger(__name__)


class PLLError(Exception):
    """Base class of every error raised by the toolkit."""

    kind = "error"


class ParseError(PLLError):
    kind = "parse"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(PLLError):
    kind = "validation"

    def __init__(self, message, violations=None):
        self.violations = list(violations or [])
        super().__init__(message)


class SelectorExhausted(PLLError):
    kind = "selector-exhausted"

    def __init__(self, index, domain):
        self.index = index
        self.domain = domain
        super().__init__(f"selector queried at index {index} but its table only covers {domain} entries")


class StepError(PLLError):
    kind = "step"


class PreconditionError(PLLError):
    kind = "precondition"


class TypingError(PLLError):
    kind = "typing"


class StepLimitExceeded(PLLError):
    kind = "step-limit"

    def __init__(self, message, steps=None):
        self.steps = steps
        super().__init__(message)


class DecodeError(PLLError):
    kind = "decode"


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class DualVar:
    name: str


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Bang:
    body: "Formula"


@dataclass(frozen=True)
class Quest:
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Var, DualVar, Tensor, Par, One, Bot, Bang, Quest, Forall, Exists]

ONE = One()
BOT = Bot()


def negate(f: Formula) -> Formula:
    """Linear negation by De Morgan's laws."""
    if isinstance(f, Var):
        return DualVar(f.name)
    if isinstance(f, DualVar):
        return Var(f.name)
    if isinstance(f, Tensor):
        return Par(negate(f.left), negate(f.right))
    if isinstance(f, Par):
        return Tensor(negate(f.left), negate(f.right))
    if isinstance(f, One):
        return BOT
    if isinstance(f, Bot):
        return ONE
    if isinstance(f, Bang):
        return Quest(negate(f.body))
    if isinstance(f, Quest):
        return Bang(negate(f.body))
    if isinstance(f, Forall):
        return Exists(f.var, negate(f.body))
    if isinstance(f, Exists):
        return Forall(f.var, negate(f.body))
    raise TypeError(f"not a formula: {f!r}")


def lolli(a: Formula, b: Formula) -> Formula:
    """A -o B, defined as ~A | B."""
    return Par(negate(a), b)


def free_vars(f: Formula) -> FrozenSet[str]:
    if isinstance(f, (Var, DualVar)):
        return frozenset((f.name,))
    if isinstance(f, (Tensor, Par)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Bang, Quest)):
        return free_vars(f.body)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    return frozenset()


def all_vars(f: Formula) -> FrozenSet[str]:
    """Every variable name occurring in f, bound or free."""
    if isinstance(f, (Var, DualVar)):
        return frozenset((f.name,))
    if isinstance(f, (Tensor, Par)):
        return all_vars(f.left) | all_vars(f.right)
    if isinstance(f, (Bang, Quest)):
        return all_vars(f.body)
    if isinstance(f, (Forall, Exists)):
        return all_vars(f.body) | {f.var}
    return frozenset()


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """Smallest numbered variant of base not in avoid."""
    avoid = set(avoid)
    stem = base.rstrip("0123456789") or "X"
    if base not in avoid:
        return base
    for n in itertools.count(1):
        candidate = f"{stem}{n}"
        if candidate not in avoid:
            return candidate


def substitute(f: Formula, var: str, b: Formula) -> Formula:
    """Capture-avoiding substitution f[b/var]; DualVar(var) becomes negate(b)."""
    if isinstance(f, Var):
        return b if f.name == var else f
    if isinstance(f, DualVar):
        return negate(b) if f.name == var else f
    if isinstance(f, Tensor):
        return Tensor(substitute(f.left, var, b), substitute(f.right, var, b))
    if isinstance(f, Par):
        return Par(substitute(f.left, var, b), substitute(f.right, var, b))
    if isinstance(f, Bang):
        return Bang(substitute(f.body, var, b))
    if isinstance(f, Quest):
        return Quest(substitute(f.body, var, b))
    if isinstance(f, (Forall, Exists)):
        if f.var == var or var not in free_vars(f.body):
            return f
        binder, body = f.var, f.body
        if binder in free_vars(b):
            new = fresh_name(binder, free_vars(b) | all_vars(body) | {var})
            body = substitute(body, binder, Var(new))
            binder = new
        return type(f)(binder, substitute(body, var, b))
    return f


def substitute_many(f: Formula, mapping: Dict[str, Formula]) -> Formula:
    for var, b in mapping.items():
        f = substitute(f, var, b)
    return f


def canonical(f: Formula, env: Tuple[str, ...] = ()) -> tuple:
    """De Bruijn form: bound variables become indices, free ones keep their name."""
    if isinstance(f, (Var, DualVar)):
        tag = "v" if isinstance(f, Var) else "d"
        for depth, name in enumerate(reversed(env)):
            if name == f.name:
                return (tag, depth)
        return (tag, f.name)
    if isinstance(f, Tensor):
        return ("*", canonical(f.left, env), canonical(f.right, env))
    if isinstance(f, Par):
        return ("|", canonical(f.left, env), canonical(f.right, env))
    if isinstance(f, One):
        return ("1",)
    if isinstance(f, Bot):
        return ("bot",)
    if isinstance(f, Bang):
        return ("!", canonical(f.body, env))
    if isinstance(f, Quest):
        return ("?", canonical(f.body, env))
    if isinstance(f, Forall):
        return ("all", canonical(f.body, env + (f.var,)))
    if isinstance(f, Exists):
        return ("ex", canonical(f.body, env + (f.var,)))
    raise TypeError(f"not a formula: {f!r}")


def alpha_eq(a: Formula, b: Formula) -> bool:
    return a == b or canonical(a) == canonical(b)


def is_dual(a: Formula, b: Formula) -> bool:
    return alpha_eq(negate(a), b)


def sequents_alpha_eq(xs: Iterable[Formula], ys: Iterable[Formula]) -> bool:
    xs, ys = list(xs), list(ys)
    return len(xs) == len(ys) and all(alpha_eq(x, y) for x, y in zip(xs, ys))


def is_banged_quest_free(f: Formula) -> bool:
    """True iff f contains no ! and no ?."""
    if isinstance(f, (Bang, Quest)):
        return False
    if isinstance(f, (Tensor, Par)):
        return is_banged_quest_free(f.left) and is_banged_quest_free(f.right)
    if isinstance(f, (Forall, Exists)):
        return is_banged_quest_free(f.body)
    return True


def is_exponential(f: Formula) -> bool:
    return isinstance(f, (Bang, Quest))


def formula_size(f: Formula) -> int:
    if isinstance(f, (Tensor, Par)):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, (Bang, Quest, Forall, Exists)):
        return 1 + formula_size(f.body)
    return 1


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Tensor, Par)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Bang, Quest, Forall, Exists)):
        yield from subformulas(f.body)


# ---------------------------------------------------------------------------
# Sequents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Occurrence:
    oid: int
    formula: Formula


@dataclass(frozen=True)
class Sequent:
    """Ordered list of formula occurrences with pairwise distinct ids."""

    occurrences: Tuple[Occurrence, ...]

    @property
    def formulas(self) -> Tuple[Formula, ...]:
        return tuple(o.formula for o in self.occurrences)

    def __len__(self):
        return len(self.occurrences)

    def __iter__(self):
        return iter(self.formulas)


class OccurrenceCounter:
    """Monotone id source, one per proof document."""

    def __init__(self, start=0):
        self._counter = itertools.count(start)

    def sequent(self, formulas: Iterable[Formula]) -> Sequent:
        return Sequent(tuple(Occurrence(next(self._counter), f) for f in formulas))


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

FORMULA_GRAMMAR = r"""
?formula: "all" NAME "." formula     -> forall
        | "ex" NAME "." formula      -> exists
        | par_expr "-o" formula      -> lolli
        | par_expr

?par_expr: par_expr "|" tensor_expr  -> par
         | tensor_expr

?tensor_expr: tensor_expr "*" unary  -> tensor
            | unary

?unary: "!" unary                     -> bang
      | "?" unary                     -> quest
      | "~" unary                     -> dual
      | atom

?atom: "1"                            -> one
     | "bot"                          -> bot
     | NAME                           -> var
     | "(" formula ")"

NAME: /(?!(all|ex|bot)\b)[A-Za-z_][A-Za-z0-9_']*/

%import common.WS
%ignore WS
"""

_SEQUENT_GRAMMAR = FORMULA_GRAMMAR + r"""
sequent: [formula ("," formula)*]
"""


class FormulaBuilder(Transformer):
    """Turns formula parse trees into Formula values."""

    def forall(self, args):
        return Forall(str(args[0]), args[1])

    def exists(self, args):
        return Exists(str(args[0]), args[1])

    def lolli(self, args):
        return lolli(args[0], args[1])

    def par(self, args):
        return Par(args[0], args[1])

    def tensor(self, args):
        return Tensor(args[0], args[1])

    def bang(self, args):
        return Bang(args[0])

    def quest(self, args):
        return Quest(args[0])

    def dual(self, args):
        return negate(args[0])

    def one(self, args):
        return ONE

    def bot(self, args):
        return BOT

    def var(self, args):
        return Var(str(args[0]))

    def sequent(self, args):
        return [a for a in args if a is not None]


_formula_parser = Lark(FORMULA_GRAMMAR, start="formula", parser="lalr")
_sequent_parser = Lark(_SEQUENT_GRAMMAR, start="sequent", parser="lalr")


def _parse(parser, text):
    try:
        tree = parser.parse(text)
    except UnexpectedInput as e:
        raise ParseError(f"syntax error: {str(e).splitlines()[0]}", e.line, e.column) from None
    except LarkError as e:
        raise ParseError(f"syntax error: {str(e)}") from None
    return FormulaBuilder().transform(tree)


def parse_formula(text: str) -> Formula:
    return _parse(_formula_parser, text)


def parse_formulas(text: str) -> List[Formula]:
    """Comma-separated formula list, possibly empty."""
    if not text.strip():
        return []
    return _parse(_sequent_parser, text)


def parse_sequent(text: str, counter: Optional[OccurrenceCounter] = None) -> Sequent:
    counter = counter or OccurrenceCounter()
    return counter.sequent(parse_formulas(text))


# Binding strength used by the printer; higher binds tighter.
_LEVEL_QUANT, _LEVEL_PAR, _LEVEL_TENSOR, _LEVEL_UNARY = 0, 1, 2, 3


def _render(f: Formula, level: int) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, DualVar):
        return f"~{f.name}"
    if isinstance(f, One):
        return "1"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Bang):
        return "!" + _render(f.body, _LEVEL_UNARY)
    if isinstance(f, Quest):
        return "?" + _render(f.body, _LEVEL_UNARY)
    if isinstance(f, Tensor):
        text = f"{_render(f.left, _LEVEL_TENSOR)} * {_render(f.right, _LEVEL_UNARY)}"
        own = _LEVEL_TENSOR
    elif isinstance(f, Par):
        text = f"{_render(f.left, _LEVEL_PAR)} | {_render(f.right, _LEVEL_TENSOR)}"
        own = _LEVEL_PAR
    elif isinstance(f, (Forall, Exists)):
        keyword = "all" if isinstance(f, Forall) else "ex"
        text = f"{keyword} {f.var}. {_render(f.body, _LEVEL_QUANT)}"
        own = _LEVEL_QUANT
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if own < level else text


def render(x) -> str:
    """Canonical text of a formula, a sequent or a list of formulas."""
    if isinstance(x, Sequent):
        return ", ".join(_render(f, _LEVEL_QUANT) for f in x.formulas)
    if isinstance(x, (list, tuple)):
        return ", ".join(_render(f, _LEVEL_QUANT) for f in x)
    return _render(x, _LEVEL_QUANT)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def formula_to_json(f: Formula) -> dict:
    if isinstance(f, Var):
        return {"tag": "var", "name": f.name}
    if isinstance(f, DualVar):
        return {"tag": "dual", "name": f.name}
    if isinstance(f, Tensor):
        return {"tag": "tensor", "left": formula_to_json(f.left), "right": formula_to_json(f.right)}
    if isinstance(f, Par):
        return {"tag": "par", "left": formula_to_json(f.left), "right": formula_to_json(f.right)}
    if isinstance(f, One):
        return {"tag": "one"}
    if isinstance(f, Bot):
        return {"tag": "bot"}
    if isinstance(f, Bang):
        return {"tag": "bang", "body": formula_to_json(f.body)}
    if isinstance(f, Quest):
        return {"tag": "quest", "body": formula_to_json(f.body)}
    if isinstance(f, Forall):
        return {"tag": "forall", "var": f.var, "body": formula_to_json(f.body)}
    if isinstance(f, Exists):
        return {"tag": "exists", "var": f.var, "body": formula_to_json(f.body)}
    raise TypeError(f"not a formula: {f!r}")


def formula_from_json(data: dict) -> Formula:
    tag = data.get("tag")
    if tag == "var":
        return Var(data["name"])
    if tag == "dual":
        return DualVar(data["name"])
    if tag == "tensor":
        return Tensor(formula_from_json(data["left"]), formula_from_json(data["right"]))
    if tag == "par":
        return Par(formula_from_json(data["left"]), formula_from_json(data["right"]))
    if tag == "one":
        return ONE
    if tag == "bot":
        return BOT
    if tag == "bang":
        return Bang(formula_from_json(data["body"]))
    if tag == "quest":
        return Quest(formula_from_json(data["body"]))
    if tag == "forall":
        return Forall(data["var"], formula_from_json(data["body"]))
    if tag == "exists":
        return Exists(data["var"], formula_from_json(data["body"]))
    raise ParseError(f"unknown formula tag {tag!r}")


def sequent_to_json(seq: Sequent) -> list:
    return [{"id": o.oid, "formula": formula_to_json(o.formula)} for o in seq.occurrences]
