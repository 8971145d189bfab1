#!/usr/bin/env python3
"""
Finite representations of derivations and coderivations.

A ProofGraph is a vertex table name -> RuleApp with a root. Back-references
to ancestors encode regular coderivations; hyp leaves encode open
approximations; box vertices carry a Selector and stand for a whole
non-wellfounded box over finitely many calls.

This module validates graphs against the rule schemas, unfolds them lazily at
tree addresses, implements the bottom-up translations of fp and nu rules into
coderivations, pruning and grafting, the approximation order, bisimulation
collapse, and the conversions to and from proof trees.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx

import rules as R
from rules import Address, Proof
from selector import Selector
from syntax import (
    ParseError,
    PreconditionError,
    ValidationError,
    canonical,
    formula_from_json,
    formula_to_json,
    render,
    sequents_alpha_eq,
)

# Set up logging
logger = logging.getLogger(__name__)

FINITE = "finite"
OPEN = "open"
REGULAR = "regular-coderivation"
NU = "nu-derivation"
WEAKLY_REGULAR = "weakly-regular"
KINDS = (FINITE, OPEN, REGULAR, NU, WEAKLY_REGULAR)

_ALLOWED = {
    FINITE: {"ax", "cut", "tensor", "par", "one", "bot", "fp", "w", "b", "forall", "exists", "ex"},
    NU: {"ax", "cut", "tensor", "par", "one", "bot", "fp", "nu", "w", "b", "forall", "exists", "ex"},
    REGULAR: {"ax", "cut", "tensor", "par", "one", "bot", "cp", "box", "w", "b", "forall", "exists", "ex"},
    WEAKLY_REGULAR: {"ax", "cut", "tensor", "par", "one", "bot", "cp", "box", "w", "b", "forall", "exists", "ex"},
}
_ALLOWED[OPEN] = set(R.RULES) - {"box"}


@dataclass(frozen=True)
class RuleApp:
    rule: str
    conclusion: Tuple
    premises: Tuple[str, ...] = ()
    data: tuple = ()

    def parents(self, premise_conclusions) -> List[List[Tuple[int, int]]]:
        return R.parent_map(self.rule, self.data, premise_conclusions)


@dataclass
class ProofGraph:
    vertices: Dict[str, RuleApp]
    root: str
    kind: str = FINITE
    open: bool = False  # hyp leaves allowed

    @property
    def conclusion(self):
        return self.vertices[self.root].conclusion

    def premise_conclusions(self, name: str):
        return [self.vertices[p].conclusion for p in self.vertices[name].premises]

    def parent_map(self, name: str):
        return self.vertices[name].parents(self.premise_conclusions(name))

    def reachable(self) -> List[str]:
        seen, order, stack = set(), [], [self.root]
        while stack:
            name = stack.pop()
            if name in seen or name not in self.vertices:
                continue
            seen.add(name)
            order.append(name)
            stack.extend(reversed(self.vertices[name].premises))
        return order

    def digraph(self) -> nx.MultiDiGraph:
        """Premise structure: an edge v -> p labelled by the 1-based premise index."""
        graph = nx.MultiDiGraph()
        for name in self.reachable():
            graph.add_node(name, rule=self.vertices[name].rule)
            for k, p in enumerate(self.vertices[name].premises, start=1):
                graph.add_edge(name, p, index=k)
        return graph


@dataclass
class Violation:
    vertex: str
    message: str


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def add(self, vertex, message):
        self.violations.append(Violation(vertex, message))

    def to_json(self) -> dict:
        return {"valid": self.valid, "violations": [{"vertex": v.vertex, "message": v.message} for v in self.violations]}


def validate(g: ProofGraph) -> ValidationReport:
    """Check every vertex against its rule schema and the kind-specific structure."""
    report = ValidationReport()
    if g.kind not in KINDS:
        report.add(g.root, f"unknown kind {g.kind!r}")
        return report
    if g.root not in g.vertices:
        report.add(g.root, "root vertex is missing")
        return report

    allowed = _ALLOWED[g.kind] | ({"hyp"} if g.open else set())
    for name in g.reachable():
        app = g.vertices[name]
        missing = [p for p in app.premises if p not in g.vertices]
        if missing:
            report.add(name, f"premise references {missing} do not resolve")
            continue
        if app.rule not in allowed:
            report.add(name, f"rule {app.rule} is not allowed in a {g.kind} graph")
        if app.rule == "box" and g.kind == REGULAR and app.data and app.data[0].is_table:
            report.add(name, "a regular coderivation cannot carry an oracle-table selector")
        try:
            computed = R.compute_conclusion(app.rule, app.data, g.premise_conclusions(name))
        except ValidationError as e:
            report.add(name, str(e))
            continue
        if not sequents_alpha_eq(computed, app.conclusion):
            report.add(name, f"declared conclusion {render(list(app.conclusion))} differs from {render(list(computed))}")

    if g.kind in (FINITE, OPEN, NU) and not nx.is_directed_acyclic_graph(g.digraph()):
        cycle = nx.find_cycle(g.digraph())
        report.add(cycle[0][0], f"a {g.kind} graph must be wellfounded, found a cycle through {cycle[0][0]}")
    logger.debug(f"Validated {len(g.vertices)} vertices: {len(report.violations)} violations")
    return report


def require_valid(g: ProofGraph) -> ProofGraph:
    report = validate(g)
    if not report.valid:
        first = report.violations[0]
        raise ValidationError(f"invalid graph at {first.vertex}: {first.message}", report.violations)
    return g


def infer_kind(g: ProofGraph) -> str:
    reachable = g.reachable()
    used = {g.vertices[n].rule for n in reachable}
    acyclic = nx.is_directed_acyclic_graph(g.digraph())
    tables = any(g.vertices[n].rule == "box" and g.vertices[n].data[0].is_table for n in reachable)
    if "nu" in used:
        return NU
    if tables:
        return WEAKLY_REGULAR
    if acyclic and not used & {"cp", "box"}:
        return OPEN if "hyp" in used else FINITE
    if acyclic and "hyp" in used and "box" not in used:
        return OPEN
    return REGULAR


# ---------------------------------------------------------------------------
# Unfolding
# ---------------------------------------------------------------------------

State = Tuple[str, int]  # (vertex, offset into a box spine)


@dataclass(frozen=True)
class UnfoldedApp:
    rule: str
    conclusion: Tuple
    data: tuple
    children: Tuple[State, ...]
    vertex: str
    offset: int = 0


class Unfolder:
    """Lazy tree view of a graph; results are cached per (vertex, offset).

    One instance serves one walk. Instances are not shared between threads.
    """

    def __init__(self, g: ProofGraph):
        self.graph = g
        self._cache: Dict[State, UnfoldedApp] = {}

    def at_state(self, state: State) -> UnfoldedApp:
        cached = self._cache.get(state)
        if cached is not None:
            return cached
        name, offset = state
        app = self.graph.vertices[name]
        if app.rule == "box":
            sel = app.data[0].shift(offset)
            head = app.premises[sel.at(0)]
            result = UnfoldedApp("cp", app.conclusion, (), ((head, 0), (name, offset + 1)), name, offset)
        else:
            result = UnfoldedApp(app.rule, app.conclusion, app.data, tuple((p, 0) for p in app.premises), name)
        self._cache[state] = result
        return result

    def state_at(self, address: Address) -> State:
        state = (self.graph.root, 0)
        for step in address:
            app = self.at_state(state)
            if not 1 <= step <= len(app.children):
                raise ValidationError(f"address {address} leaves the tree at rule {app.rule}")
            state = app.children[step - 1]
        return state

    def unfold(self, address: Address) -> UnfoldedApp:
        return self.at_state(self.state_at(address))


def unfold(g: ProofGraph, address: Address) -> UnfoldedApp:
    """Rule application at a tree address, following back-edges and selectors."""
    return Unfolder(g).unfold(tuple(address))


def expand_tree(g: ProofGraph, depth: int) -> Dict[Address, UnfoldedApp]:
    """Every address of the unfolding up to the given length."""
    unfolder = Unfolder(g)
    result = {}
    frontier = [((), (g.root, 0))]
    for _ in range(depth + 1):
        next_frontier = []
        for address, state in frontier:
            app = unfolder.at_state(state)
            result[address] = app
            for k, child in enumerate(app.children, start=1):
                next_frontier.append((address + (k,), child))
        frontier = next_frontier
    return result


# ---------------------------------------------------------------------------
# Translations
# ---------------------------------------------------------------------------

def expand_fp(g: ProofGraph) -> ProofGraph:
    """Replace every fp vertex by a cp vertex whose right premise is itself."""
    if g.kind not in (FINITE, OPEN):
        raise PreconditionError(f"expand_fp expects a finite derivation, got a {g.kind} graph")
    require_valid(g)
    vertices = {}
    for name, app in g.vertices.items():
        if app.rule == "fp":
            vertices[name] = RuleApp("cp", app.conclusion, (app.premises[0], name))
        else:
            vertices[name] = app
    kind = REGULAR
    logger.debug(f"Expanded {sum(1 for a in g.vertices.values() if a.rule == 'fp')} fp vertices")
    return ProofGraph(vertices, g.root, kind, g.open)


def expand_nu(g: ProofGraph) -> ProofGraph:
    """Turn every nu vertex into a box with the same selector; fp vertices become cp loops."""
    if g.kind not in (NU, FINITE, OPEN):
        raise PreconditionError(f"expand_nu expects a nu-derivation, got a {g.kind} graph")
    require_valid(g)
    vertices = {}
    for name, app in g.vertices.items():
        if app.rule == "fp":
            vertices[name] = RuleApp("cp", app.conclusion, (app.premises[0], name))
        elif app.rule == "nu":
            vertices[name] = RuleApp("box", app.conclusion, app.premises, app.data)
        else:
            vertices[name] = app
    tables = any(a.rule == "nu" and a.data[0].is_table for a in g.vertices.values())
    kind = WEAKLY_REGULAR if tables or any(a.rule == "nu" for a in g.vertices.values()) else REGULAR
    return ProofGraph(vertices, g.root, kind, g.open)


# ---------------------------------------------------------------------------
# Pruning and grafting
# ---------------------------------------------------------------------------

def _check_antichain(addresses: Sequence[Address]):
    addresses = [tuple(a) for a in addresses]
    for a, b in itertools.permutations(addresses, 2):
        if b[:len(a)] == a:
            raise ValidationError(f"addresses {a} and {b} are comparable")


class _Builder:
    """Copies the unfolding of a graph along given paths into a new vertex table."""

    def __init__(self, g: ProofGraph):
        self.graph = g
        self.unfolder = Unfolder(g)
        self.vertices: Dict[str, RuleApp] = dict(g.vertices)
        self._names = (f"n{k}" for k in itertools.count())
        self._shifted: Dict[State, str] = {}

    def fresh(self) -> str:
        name = next(self._names)
        while name in self.vertices:
            name = next(self._names)
        return name

    def name_of(self, state: State) -> str:
        name, offset = state
        if offset == 0:
            return name
        if state not in self._shifted:
            app = self.graph.vertices[name]
            fresh = self.fresh()
            self.vertices[fresh] = RuleApp("box", app.conclusion, app.premises, (app.data[0].shift(offset),))
            self._shifted[state] = fresh
        return self._shifted[state]

    def copy(self, state: State, targets: Dict[Address, object], leaf) -> str:
        """Copy the path structure towards targets; leaf(state, payload) names the replaced nodes."""
        if () in targets:
            return leaf(state, targets[()])
        if not targets:
            return self.name_of(state)
        app = self.unfolder.at_state(state)
        groups: Dict[int, Dict[Address, object]] = {}
        for address, payload in targets.items():
            if not 1 <= address[0] <= len(app.children):
                raise ValidationError(f"address step {address[0]} leaves the tree at rule {app.rule}")
            groups.setdefault(address[0], {})[address[1:]] = payload
        premises = tuple(self.copy(child, groups.get(k, {}), leaf)
                         for k, child in enumerate(app.children, start=1))
        fresh = self.fresh()
        self.vertices[fresh] = RuleApp(app.rule, app.conclusion, premises, app.data)
        return fresh

    def finish(self, root: str, open_: bool) -> ProofGraph:
        g = ProofGraph(self.vertices, root, REGULAR, open_)
        g = ProofGraph({n: self.vertices[n] for n in g.reachable()}, root, REGULAR, open_)
        g.kind = infer_kind(g)
        return g


def prune(g: ProofGraph, addresses: Sequence[Address]) -> ProofGraph:
    """Open graph with a hyp leaf at each of the pairwise incomparable addresses."""
    _check_antichain(addresses)
    builder = _Builder(g)

    def leaf(state, _payload):
        fresh = builder.fresh()
        builder.vertices[fresh] = RuleApp("hyp", builder.unfolder.at_state(state).conclusion, (),
                                          (builder.unfolder.at_state(state).conclusion,))
        return fresh

    root = builder.copy((g.root, 0), {tuple(a): None for a in addresses}, leaf)
    return builder.finish(root, True)


def subgraph(g: ProofGraph, address: Address) -> ProofGraph:
    """The sub-coderivation rooted at address, as a graph of its own."""
    builder = _Builder(g)
    state = builder.unfolder.state_at(tuple(address))
    root = builder.name_of(state)
    return builder.finish(root, g.open)


def graft(g: ProofGraph, replacements: Dict[Address, ProofGraph]) -> ProofGraph:
    """Substitute graphs at addresses; conclusions must match up to renaming of bound variables."""
    _check_antichain(list(replacements))
    builder = _Builder(g)
    counter = itertools.count()

    def leaf(state, replacement: ProofGraph):
        expected = builder.unfolder.at_state(state).conclusion
        if not sequents_alpha_eq(expected, replacement.conclusion):
            raise ValidationError(f"graft: replacement proves {render(list(replacement.conclusion))} "
                                  f"instead of {render(list(expected))}")
        prefix = f"g{next(counter)}_"
        for name, app in replacement.vertices.items():
            builder.vertices[prefix + name] = RuleApp(app.rule, app.conclusion,
                                                      tuple(prefix + p for p in app.premises), app.data)
        return prefix + replacement.root

    root = builder.copy((g.root, 0), {tuple(a): r for a, r in replacements.items()}, leaf)
    result = builder.finish(root, g.open)
    result.open = any(result.vertices[n].rule == "hyp" for n in result.reachable())
    result.kind = infer_kind(result)
    return result


def _data_key(rule, data):
    if rule in ("ax",):
        return tuple(canonical(f) for f in data)
    if rule == "hyp":
        return tuple(canonical(f) for f in data[0])
    if rule == "w":
        return (canonical(data[0]),)
    if rule == "exists":
        return (data[0], canonical(data[1]), canonical(data[2]))
    return data


def approximates(small: ProofGraph, big: ProofGraph) -> bool:
    """small is obtained from big by pruning some antichain (the approximation order)."""
    left, right = Unfolder(small), Unfolder(big)
    assumed: Set[Tuple[State, State]] = set()
    stack = [((small.root, 0), (big.root, 0))]
    while stack:
        pair = stack.pop()
        if pair in assumed:
            continue
        assumed.add(pair)
        a, b = left.at_state(pair[0]), right.at_state(pair[1])
        if not sequents_alpha_eq(a.conclusion, b.conclusion):
            return False
        if a.rule == "hyp":
            continue
        if a.rule != b.rule or _data_key(a.rule, a.data) != _data_key(b.rule, b.data):
            return False
        if len(a.children) != len(b.children):
            return False
        stack.extend(zip(a.children, b.children))
    return True


def same_unfolding(g1: ProofGraph, g2: ProofGraph) -> bool:
    return approximates(g1, g2) and approximates(g2, g1)


def collapse(g: ProofGraph) -> ProofGraph:
    """Bisimulation quotient by partition refinement."""
    names = g.reachable()
    block = {}
    keys = {}
    for n in names:
        app = g.vertices[n]
        keys[n] = (app.rule, _data_key(app.rule, app.data), tuple(canonical(f) for f in app.conclusion))
    numbering = {k: i for i, k in enumerate(sorted(set(keys.values()), key=repr))}
    block = {n: numbering[keys[n]] for n in names}
    while True:
        signature = {n: (block[n], tuple(block[p] for p in g.vertices[n].premises)) for n in names}
        numbering = {k: i for i, k in enumerate(sorted(set(signature.values())))}
        refined = {n: numbering[signature[n]] for n in names}
        if len(set(refined.values())) == len(set(block.values())):
            block = refined
            break
        block = refined
    representative = {}
    for n in names:
        representative.setdefault(block[n], n)
    vertices = {}
    for b, n in representative.items():
        app = g.vertices[n]
        vertices[n] = RuleApp(app.rule, app.conclusion, tuple(representative[block[p]] for p in app.premises), app.data)
    logger.info(f"Collapsed {len(names)} vertices into {len(vertices)}")
    return ProofGraph(vertices, representative[block[g.root]], g.kind, g.open)


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------

def to_tree(g: ProofGraph) -> Proof:
    """Proof tree in which cp-only right-premise cycles become box nodes.

    Any other cycle makes the tree infinite in a way no box can express and
    raises PreconditionError.
    """
    memo: Dict[str, Proof] = {}
    in_progress: Set[str] = set()

    def build(name: str) -> Proof:
        if name in memo:
            return memo[name]
        if name in in_progress:
            raise PreconditionError(f"cycle through {name} does not run along the main branch of a box")
        in_progress.add(name)
        app = g.vertices[name]
        if app.rule == "cp":
            chain = [name]
            current = app.premises[1]
            while g.vertices[current].rule == "cp" and current not in chain:
                chain.append(current)
                current = g.vertices[current].premises[1]
            if current in chain:
                loop = chain.index(current)
                call_names = [g.vertices[c].premises[0] for c in chain]
                distinct = list(dict.fromkeys(call_names))
                in_progress.update(chain)
                calls = [build(c) for c in distinct]
                sequence = [distinct.index(c) for c in call_names]
                selector = Selector(len(distinct), tuple(sequence[:loop]), tuple(sequence[loop:]))
                node = R.box(calls, selector)
                for k, c in enumerate(chain):
                    memo[c] = R.box(calls, selector.shift(k)) if k else node
                    in_progress.discard(c)
                return memo[name]
        if app.rule in ("box", "nu"):
            node = R.make(app.rule, [build(p) for p in app.premises], app.data)
        else:
            node = R.make(app.rule, [build(p) for p in app.premises], app.data)
        in_progress.discard(name)
        memo[name] = node
        return node

    return build(g.root)


def to_graph(proof: Proof, cycles: bool = True) -> ProofGraph:
    """Vertex table of a proof tree; periodic boxes become cp cycles when cycles is set."""
    names: Dict[Proof, str] = {}
    vertices: Dict[str, RuleApp] = {}
    counter = itertools.count()

    def visit(node: Proof) -> str:
        if node in names:
            return names[node]
        name = f"v{next(counter)}"
        names[node] = name
        if node.rule == "box" and cycles and node.selector.is_periodic:
            sel = node.selector
            call_names = [visit(c) for c in node.premises]
            positions = [name] + [f"v{next(counter)}" for _ in range(sel.horizon() - 1)]
            loop = len(sel.prefix)
            for k, position in enumerate(positions):
                successor = positions[k + 1] if k + 1 < len(positions) else positions[loop]
                vertices[position] = RuleApp("cp", node.conclusion, (call_names[sel.at(k)], successor))
            return name
        premises = tuple(visit(p) for p in node.premises)
        vertices[name] = RuleApp(node.rule, node.conclusion, premises, node.data)
        return name

    root = visit(proof)
    g = ProofGraph(vertices, root, REGULAR, any(v.rule == "hyp" for v in vertices.values()))
    g.kind = infer_kind(g)
    return g


# ---------------------------------------------------------------------------
# JSON and DOT
# ---------------------------------------------------------------------------

def _data_to_json(rule, data):
    if rule == "ax":
        return [formula_to_json(f) for f in data]
    if rule == "hyp":
        return [formula_to_json(f) for f in data[0]]
    if rule == "w":
        return formula_to_json(data[0])
    if rule == "forall":
        return {"position": data[0], "var": data[1]}
    if rule == "exists":
        return {"position": data[0], "formula": formula_to_json(data[1]), "witness": formula_to_json(data[2])}
    if rule in ("box", "nu"):
        return data[0].to_json()
    if rule == "ex":
        return list(data[0])
    return list(data)


def _data_from_json(rule, raw):
    if rule == "ax":
        return tuple(formula_from_json(f) for f in raw)
    if rule == "hyp":
        return (tuple(formula_from_json(f) for f in raw),)
    if rule == "w":
        return (formula_from_json(raw),)
    if rule == "forall":
        return (int(raw["position"]), raw["var"])
    if rule == "exists":
        return (int(raw["position"]), formula_from_json(raw["formula"]), formula_from_json(raw["witness"]))
    if rule in ("box", "nu"):
        return (Selector.from_json(raw),)
    if rule == "ex":
        return (tuple(int(k) for k in raw),)
    return tuple(int(k) for k in raw)


def graph_to_json(g: ProofGraph) -> dict:
    vertices = {}
    for name in g.reachable():
        app = g.vertices[name]
        entry = {
            "rule": app.rule,
            "conclusion": [formula_to_json(f) for f in app.conclusion],
            "premises": list(app.premises),
            "data": _data_to_json(app.rule, app.data),
        }
        try:
            entry["parents"] = g.parent_map(name)
        except ValidationError:
            entry["parents"] = None
        vertices[name] = entry
    return {"root": g.root, "kind": g.kind, "open": g.open, "vertices": vertices}


def graph_from_json(data: dict) -> ProofGraph:
    try:
        vertices = {}
        for name, entry in data["vertices"].items():
            rule = entry["rule"]
            vertices[name] = RuleApp(rule, tuple(formula_from_json(f) for f in entry["conclusion"]),
                                     tuple(entry.get("premises", [])), _data_from_json(rule, entry.get("data", [])))
        return ProofGraph(vertices, data["root"], data.get("kind", FINITE), bool(data.get("open", False)))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed proof graph JSON: {str(e)}") from None


_RULE_COLOURS = {"cut": "red", "cp": "blue", "box": "blue", "nu": "blue", "fp": "blue", "b": "orange",
                 "w": "gray", "hyp": "yellow"}


def graph_to_dot(g: ProofGraph) -> str:
    lines = ["digraph proof {", "  node [shape=box, fontname=monospace];"]
    for name in g.reachable():
        app = g.vertices[name]
        text = f"{app.rule}: {render(list(app.conclusion))}".replace('"', '\\"')
        colour = _RULE_COLOURS.get(app.rule, "black")
        lines.append(f'  "{name}" [label="{text}", color={colour}];')
        for k, p in enumerate(app.premises, start=1):
            lines.append(f'  "{name}" -> "{p}" [label="{k}"];')
    lines.append("}")
    return "\n".join(lines)
