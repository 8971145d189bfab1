#!/usr/bin/env python3
"""
Proof-script format for derivations and coderivations.

    # comments run to the end of the line
    kind regular-coderivation
    def a  : ~X, X        = ax(~X)
    def v0 : ?~X, !X      = cp(; a, v0)
    def s  : ?~X, !X      = box(selector prefix=[1] period=[0]; a, b)
    root v0

A definition names a vertex, optionally declares its conclusion, and applies a
rule to arguments (before ';') and premise names (after ';'). Referring to a
vertex defined later, or to the vertex itself, creates a back-edge. Omitted
conclusions are computed from the premises when the references allow it.
Selectors read `prefix=[..] period=[..]`, `table=[..]` or `table="file.json"`.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional

from lark import Lark
from lark.exceptions import LarkError, UnexpectedInput

import rules as R
from proofgraph import ProofGraph, RuleApp, graph_from_json, graph_to_json, infer_kind
from selector import Selector
from syntax import (
    FORMULA_GRAMMAR,
    FormulaBuilder,
    One,
    ParseError,
    ValidationError,
    Var,
    negate,
    render,
)

# Set up logging
logger = logging.getLogger(__name__)

SCRIPT_GRAMMAR = FORMULA_GRAMMAR + r"""
start: statement*

?statement: "def" NAME [":" sequent] "=" rule_name "(" [arguments] [";" names] ")"  -> definition
          | "root" NAME                                                          -> root
          | "kind" KIND                                                          -> kind

rule_name: NAME                                     -> named_rule
         | "ex"                                     -> exchange_rule
sequent: [formula ("," formula)*]
arguments: argument ("," argument)*
?argument: INT                                      -> int_arg
         | formula
         | "selector" selector_field+               -> selector
names: NAME ("," NAME)*

selector_field: "prefix" "=" int_list               -> prefix
              | "period" "=" int_list               -> period
              | "table" "=" int_list                -> table
              | "table" "=" ESCAPED_STRING          -> table_file
              | "calls" "=" INT                     -> calls
int_list: "[" [INT ("," INT)*] "]"

KIND: /finite|open|regular-coderivation|nu-derivation|weakly-regular/
COMMENT: /#[^\n]*/

%import common.INT
%import common.ESCAPED_STRING
%ignore COMMENT
"""


@dataclass
class Definition:
    name: str
    conclusion: Optional[list]
    rule: str
    arguments: list
    premises: List[str]
    line: int


class ScriptBuilder(FormulaBuilder):
    """Turns script parse trees into definitions and directives."""

    def __init__(self, base_dir: str):
        super().__init__()
        self.base_dir = base_dir

    def start(self, args):
        return list(args)

    def definition(self, args):
        name, conclusion, rule, arguments, premises = args
        return Definition(str(name), conclusion, str(rule), arguments or [], premises or [], name.line)

    def named_rule(self, args):
        return str(args[0])

    def exchange_rule(self, args):
        return "ex"

    def root(self, args):
        return ("root", str(args[0]))

    def kind(self, args):
        return ("kind", str(args[0]))

    def arguments(self, args):
        return list(args)

    def names(self, args):
        return [str(a) for a in args]

    def int_arg(self, args):
        return int(args[0])

    def int_list(self, args):
        return [int(a) for a in args if a is not None]

    def prefix(self, args):
        return ("prefix", args[0])

    def period(self, args):
        return ("period", args[0])

    def table(self, args):
        return ("table", args[0])

    def table_file(self, args):
        path = os.path.join(self.base_dir, json.loads(str(args[0])))
        try:
            with open(path, "r", encoding="utf-8") as f:
                return ("table", [int(v) for v in json.load(f)])
        except (OSError, ValueError, TypeError) as e:
            raise ParseError(f"cannot read oracle table {path}: {str(e)}") from None

    def calls(self, args):
        return ("calls", int(args[0]))

    def selector(self, args):
        return dict(args)


def _parser():
    return Lark(SCRIPT_GRAMMAR, start="start", parser="lalr")


_script_parser = _parser()


def _as_int(value, name, rule):
    # the literal 1 lexes as the formula 1
    if isinstance(value, One):
        return 1
    if isinstance(value, int):
        return value
    raise ParseError(f"{name}: {rule} expects a position, got {render(value)}")


def _rule_data(d: Definition, premise_count: int) -> tuple:
    args, rule = d.arguments, d.rule
    if rule == "ax":
        if len(args) == 1:
            return (args[0], negate(args[0]))
        if len(args) == 2:
            return tuple(args)
        if not args and d.conclusion and len(d.conclusion) == 2:
            return tuple(d.conclusion)
        raise ParseError(f"{d.name}: ax takes one or two formulas", d.line)
    if rule == "hyp":
        formulas = tuple(args) if args else tuple(d.conclusion or ())
        return (formulas,)
    if rule in ("cut", "tensor", "par", "b"):
        if len(args) != 2:
            raise ParseError(f"{d.name}: {rule} takes two positions", d.line)
        return tuple(_as_int(a, d.name, rule) for a in args)
    if rule in ("one", "bot", "fp", "cp"):
        return ()
    if rule == "w":
        if args:
            return (args[0],)
        if d.conclusion:
            return (d.conclusion[-1],)
        raise ParseError(f"{d.name}: w needs the weakened formula", d.line)
    if rule == "forall":
        if len(args) != 2 or not isinstance(args[1], Var):
            raise ParseError(f"{d.name}: forall takes a position and an eigenvariable", d.line)
        return (_as_int(args[0], d.name, rule), args[1].name)
    if rule == "exists":
        if len(args) != 3:
            raise ParseError(f"{d.name}: exists takes a position, the formula and the witness", d.line)
        return (_as_int(args[0], d.name, rule), args[1], args[2])
    if rule in ("box", "nu"):
        if len(args) != 1 or not isinstance(args[0], dict):
            raise ParseError(f"{d.name}: {rule} takes a selector", d.line)
        sel_args = args[0]
        calls = sel_args.get("calls", premise_count)
        if "table" in sel_args:
            return (Selector.from_table(calls, sel_args["table"]),)
        return (Selector.periodic(calls, sel_args.get("prefix", []), sel_args.get("period", [0])),)
    if rule == "ex":
        return (tuple(_as_int(a, d.name, rule) for a in args),)
    raise ParseError(f"{d.name}: unknown rule {rule!r}", d.line)


def _resolve_conclusions(definitions: Dict[str, Definition], data: Dict[str, tuple]) -> Dict[str, tuple]:
    known = {n: tuple(d.conclusion) for n, d in definitions.items() if d.conclusion is not None}
    pending = [n for n in definitions if n not in known]
    while pending:
        progress = []
        for n in pending:
            d = definitions[n]
            if all(p in known for p in d.premises):
                try:
                    known[n] = R.compute_conclusion(d.rule, data[n], [known[p] for p in d.premises])
                except ValidationError as e:
                    raise ParseError(f"{n}: {str(e)}", d.line) from None
                progress.append(n)
        if not progress:
            raise ParseError(f"conclusion of {pending[0]} must be declared: it depends on a back-reference",
                             definitions[pending[0]].line)
        pending = [n for n in pending if n not in progress]
    return known


def parse_script(text: str, base_dir: str = ".") -> ProofGraph:
    """ProofGraph described by a proof script; the graph is not validated here."""
    try:
        tree = _script_parser.parse(text)
    except UnexpectedInput as e:
        raise ParseError(f"syntax error: {str(e).splitlines()[0]}", e.line, e.column) from None
    except LarkError as e:
        raise ParseError(f"syntax error: {str(e)}") from None
    try:
        statements = ScriptBuilder(base_dir).transform(tree)
    except LarkError as e:
        cause = getattr(e, "orig_exc", e)
        if isinstance(cause, ParseError):
            raise cause from None
        raise ParseError(f"malformed script: {str(cause)}") from None

    definitions: Dict[str, Definition] = {}
    root, kind = None, None
    for statement in statements:
        if isinstance(statement, Definition):
            if statement.name in definitions:
                raise ParseError(f"vertex {statement.name} is defined twice", statement.line)
            definitions[statement.name] = statement
            root = root if root is not None and root[0] == "explicit" else ("last", statement.name)
        elif statement[0] == "root":
            root = ("explicit", statement[1])
        else:
            kind = statement[1]
    if not definitions:
        raise ParseError("script defines no vertex")

    for d in definitions.values():
        for p in d.premises:
            if p not in definitions:
                raise ParseError(f"{d.name}: premise {p} is never defined", d.line)
    data = {n: _rule_data(d, len(d.premises)) for n, d in definitions.items()}
    conclusions = _resolve_conclusions(definitions, data)
    vertices = {n: RuleApp(d.rule, conclusions[n], tuple(d.premises), data[n]) for n, d in definitions.items()}
    has_hyp = any(v.rule == "hyp" for v in vertices.values())
    g = ProofGraph(vertices, root[1], kind or "finite", has_hyp)
    if kind is None:
        g.kind = infer_kind(g)
    logger.debug(f"Parsed script with {len(vertices)} vertices, root {g.root}, kind {g.kind}")
    return g


def _render_arguments(app: RuleApp) -> str:
    rule, data = app.rule, app.data
    if rule == "ax":
        return render(data[0])
    if rule == "hyp":
        return render(list(data[0]))
    if rule in ("cut", "tensor", "par", "b"):
        return f"{data[0]}, {data[1]}"
    if rule == "w":
        return render(data[0])
    if rule == "forall":
        return f"{data[0]}, {data[1]}"
    if rule == "exists":
        return f"{data[0]}, {render(data[1])}, {render(data[2])}"
    if rule in ("box", "nu"):
        sel = data[0]
        if sel.is_table:
            return f"selector calls={sel.calls} table={list(sel.table)}"
        return f"selector calls={sel.calls} prefix={list(sel.prefix)} period={list(sel.period)}"
    if rule == "ex":
        return ", ".join(str(k) for k in data[0])
    return ""


def graph_to_script(g: ProofGraph) -> str:
    lines = [f"kind {g.kind}"]
    for name in g.reachable():
        app = g.vertices[name]
        arguments = _render_arguments(app)
        premises = f"; {', '.join(app.premises)}" if app.premises else ""
        lines.append(f"def {name} : {render(list(app.conclusion))} = {app.rule}({arguments}{premises})")
    lines.append(f"root {g.root}")
    return "\n".join(lines) + "\n"


def load_graph(path: str) -> ProofGraph:
    """Read a proof script (.pll) or a JSON vertex table (.json)."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {str(e)}") from None
    if path.endswith(".json"):
        try:
            return graph_from_json(json.loads(text))
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in {path}: {str(e)}", e.lineno, e.colno) from None
    return parse_script(text, os.path.dirname(os.path.abspath(path)))


def save_graph(g: ProofGraph, path: str):
    with open(path, "w", encoding="utf-8") as f:
        if path.endswith(".json"):
            json.dump(graph_to_json(g), f, indent=2)
        else:
            f.write(graph_to_script(g))
    logger.info(f"Wrote {len(g.vertices)} vertices to {path}")
