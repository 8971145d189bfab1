#!/usr/bin/env python3
"""
Global criteria and structural measures of coderivations.

The checks work on the finite representation: cycles of the vertex table
stand for the infinite branches of the unfolding, and box vertices stand for
non-wellfounded boxes (nwbs) whose main branch is left implicit.

Measures (nesting levels, depth, decomposition prebar, base, cosize) and the
truncations are computed on proof trees in which every nwb is a single box
node, so the nwb calls are the box premises.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import networkx as nx

import rules as R
from proofgraph import NU, ProofGraph, Unfolder, prune, to_graph, to_tree
from rules import Address, Proof
from selector import Selector
from syntax import Bang, Formula, PreconditionError, Quest, ValidationError, render

# Set up logging
logger = logging.getLogger(__name__)

DEFAULT_DEPTH_CAP = 10**4

Summary = FrozenSet[Tuple[int, int, bool]]


# ---------------------------------------------------------------------------
# Threads
# ---------------------------------------------------------------------------

@dataclass
class Thread:
    """A sequence of !-formula (or ?-formula) occurrences along one branch.

    elements are (address, position) pairs, each position an immediate
    ancestor of the previous one; progress counts the steps where the
    occurrence is the principal !-formula of a cp and continues into the
    right premise.
    """

    elements: List[Tuple[Address, int]]
    polarity: str
    progress: int = 0

    def to_json(self) -> dict:
        return {"polarity": self.polarity, "progress": self.progress,
                "elements": [{"address": list(a), "position": p} for a, p in self.elements]}


def _polarity(f: Formula) -> Optional[str]:
    if isinstance(f, Bang):
        return "bang"
    if isinstance(f, Quest):
        return "quest"
    return None


def follow_thread(g: ProofGraph, branch: Address, position: int) -> Thread:
    """The thread of the occurrence at position of the root conclusion along branch.

    The thread stops where the branch ends or where the occurrence has no
    immediate ancestor of the same polarity in the next premise.
    """
    unfolder = Unfolder(g)
    state = (g.root, 0)
    app = unfolder.at_state(state)
    if not 0 <= position < len(app.conclusion):
        raise ValidationError(f"position {position} outside the root conclusion")
    polarity = _polarity(app.conclusion[position])
    if polarity is None:
        raise ValidationError(f"{render(app.conclusion[position])} is neither a !-formula nor a ?-formula")
    thread = Thread([((), position)], polarity)
    address: Address = ()
    for step in branch:
        app = unfolder.at_state(state)
        if not 1 <= step <= len(app.children):
            break
        child = unfolder.at_state(app.children[step - 1])
        premise_conclusions = [unfolder.at_state(c).conclusion for c in app.children]
        parents = R.parent_map(app.rule, app.data, premise_conclusions)
        principal = app.rule in R.PROMOTIONS and position == len(app.conclusion) - 1
        if principal and not (app.rule == "cp" and step == 2):
            break
        upward = [n for k, n in parents[position] if k == step - 1 and _polarity(child.conclusion[n]) == polarity]
        if not upward:
            break
        if app.rule == "cp" and polarity == "bang" and position == len(app.conclusion) - 1 and step == 2:
            thread.progress += 1
        position = upward[0]
        address = address + (step,)
        state = app.children[step - 1]
        thread.elements.append((address, position))
    return thread


# ---------------------------------------------------------------------------
# Non-wellfounded boxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NwbDescriptor:
    """An nwb of the representation: its main-branch vertices, calls and principal !-formula."""

    main: Tuple[str, ...]
    calls: Tuple[str, ...]
    principal: Formula
    boxed: bool = False  # the spine ends in a box vertex

    def to_json(self) -> dict:
        return {"main": list(self.main), "calls": list(self.calls),
                "principal": render(self.principal), "boxed": self.boxed}


def _spine_end(g: ProofGraph, name: str) -> Optional[Tuple[str, FrozenSet[str]]]:
    """Where the right-premise chain of a cp vertex ends up, if it never leaves cp vertices."""
    chain: List[str] = []
    current = name
    while current not in chain:
        app = g.vertices[current]
        if app.rule == "box":
            return ("box", frozenset((current,)))
        if app.rule != "cp":
            return None
        chain.append(current)
        current = app.premises[1]
    return ("cycle", frozenset(chain[chain.index(current):]))


def main_branch_vertices(g: ProofGraph) -> Dict[str, FrozenSet[str]]:
    """Vertex -> key of the nwb spine it belongs to."""
    result = {}
    for name in g.reachable():
        app = g.vertices[name]
        if app.rule == "box":
            result[name] = frozenset((name,))
        elif app.rule == "cp":
            end = _spine_end(g, name)
            if end is not None:
                result[name] = end[1]
    return result


def detect_nwbs(g: ProofGraph) -> List[NwbDescriptor]:
    """One descriptor per cp-only right-premise cycle and per box vertex."""
    groups: Dict[FrozenSet[str], List[str]] = {}
    for name, key in main_branch_vertices(g).items():
        groups.setdefault(key, []).append(name)
    descriptors = []
    for key, members in groups.items():
        calls: List[str] = []
        boxed = False
        for name in members:
            app = g.vertices[name]
            if app.rule == "box":
                boxed = True
                calls.extend(app.premises)
            else:
                calls.append(app.premises[0])
        principal = g.vertices[members[0]].conclusion[-1]
        descriptors.append(NwbDescriptor(tuple(members), tuple(dict.fromkeys(calls)), principal, boxed))
    logger.debug(f"Detected {len(descriptors)} nwbs")
    return descriptors


# ---------------------------------------------------------------------------
# Global criteria
# ---------------------------------------------------------------------------

def _cyclic_components(graph) -> List[Set[str]]:
    components = []
    for component in nx.strongly_connected_components(graph):
        if len(component) > 1:
            components.append(component)
        else:
            (node,) = component
            if graph.has_edge(node, node):
                components.append(component)
    return components


def check_finitely_expandable(g: ProofGraph) -> bool:
    """No cycle of the representation runs through a cut or an absorption."""
    for component in _cyclic_components(g.digraph()):
        offending = [n for n in component if g.vertices[n].rule in ("cut", "b")]
        if offending:
            logger.debug(f"Cycle through {sorted(component)} contains {g.vertices[offending[0]].rule} at {offending[0]}")
            return False
    return True


def _without_right_premises(g: ProofGraph):
    graph = g.digraph()
    drop = [(u, v, k) for u, v, k, data in graph.edges(keys=True, data=True)
            if g.vertices[u].rule == "cp" and data["index"] == 2]
    graph.remove_edges_from(drop)
    return graph


def check_weakly_progressing(g: ProofGraph) -> bool:
    """Every cycle crosses the right premise of a cp; box spines are progressing by construction."""
    return nx.is_directed_acyclic_graph(_without_right_premises(g))


def _bang_positions(conclusion) -> List[int]:
    return [k for k, f in enumerate(conclusion) if isinstance(f, Bang)]


def _edge_summaries(g: ProofGraph) -> Dict[Tuple[str, str], Set[Summary]]:
    """Size-change summaries of the !-thread steps along every premise edge."""
    edges: Dict[Tuple[str, str], Set[Summary]] = defaultdict(set)
    for name in g.reachable():
        app = g.vertices[name]
        premise_conclusions = g.premise_conclusions(name)
        parents = R.parent_map(app.rule, app.data, premise_conclusions)
        last = len(app.conclusion) - 1
        per_premise: Dict[int, Set[Tuple[int, int, bool]]] = defaultdict(set)
        for i in _bang_positions(app.conclusion):
            for k, n in parents[i]:
                if not isinstance(premise_conclusions[k][n], Bang):
                    continue
                principal = app.rule in R.PROMOTIONS and i == last
                if principal and not (app.rule == "cp" and k == 1):
                    continue
                strict = principal
                per_premise[k].add((i, n, strict))
        for k, premise in enumerate(app.premises):
            edges[(name, premise)].add(frozenset(per_premise.get(k, set())))
        if app.rule == "box":
            edges[(name, name)].add(frozenset({(last, last, True)}))
    return edges


def _compose(a: Summary, b: Summary) -> Summary:
    merged: Dict[Tuple[int, int], bool] = {}
    for i, j, s1 in a:
        for j2, k, s2 in b:
            if j == j2:
                merged[(i, k)] = merged.get((i, k), False) or s1 or s2
    return frozenset((i, k, s) for (i, k), s in merged.items())


def _normal(summary: Summary) -> Summary:
    merged: Dict[Tuple[int, int], bool] = {}
    for i, k, s in summary:
        merged[(i, k)] = merged.get((i, k), False) or s
    return frozenset((i, k, s) for (i, k), s in merged.items())


def progressing_by_threads(g: ProofGraph) -> Tuple[bool, Optional[str]]:
    """Decide progressing by the size-change closure of the !-thread steps.

    Every infinite branch carries a thread that is principal for cp
    infinitely often iff every idempotent summary of a cycle has a strict
    self-loop. Returns the verdict and, when it fails, a vertex on an
    offending cycle.
    """
    edges = _edge_summaries(g)
    closure: Dict[Tuple[str, str], Set[Summary]] = defaultdict(set)
    work = []
    for (u, v), summaries in edges.items():
        for s in summaries:
            s = _normal(s)
            if s not in closure[(u, v)]:
                closure[(u, v)].add(s)
                work.append((u, v, s))
    outgoing: Dict[str, List[Tuple[str, Summary]]] = defaultdict(list)
    for (u, v), summaries in edges.items():
        for s in summaries:
            outgoing[u].append((v, _normal(s)))
    while work:
        u, v, s = work.pop()
        for w, t in outgoing[v]:
            composed = _compose(s, t)
            if composed not in closure[(u, w)]:
                closure[(u, w)].add(composed)
                work.append((u, w, composed))
    for (u, v), summaries in closure.items():
        if u != v:
            continue
        for s in summaries:
            if _compose(s, s) == s and not any(i == k and strict for i, k, strict in s):
                logger.debug(f"Idempotent cycle summary at {u} has no progressing thread")
                return False, u
    return True, None


def check_progressing(g: ProofGraph) -> bool:
    """Every infinite branch carries a !-thread principal for cp infinitely often.

    Finitely expandable graphs are progressing exactly when they are weakly
    progressing; the thread closure decides the remaining ones.
    """
    if check_finitely_expandable(g):
        return check_weakly_progressing(g)
    return progressing_by_threads(g)[0]


def offending_cycle(g: ProofGraph) -> Optional[List[str]]:
    """A cycle of the representation that carries no progressing thread, if any."""
    if check_finitely_expandable(g):
        try:
            return [u for u, _, _ in nx.find_cycle(_without_right_premises(g))]
        except nx.NetworkXNoCycle:
            return None
    ok, vertex = progressing_by_threads(g)
    if ok:
        return None
    try:
        return [u for u, _, _ in nx.find_cycle(g.digraph(), source=vertex)]
    except nx.NetworkXNoCycle:
        return [vertex]


def check_weakly_regular(g: ProofGraph) -> bool:
    """Finitely many distinct sub-coderivations sit at cp left premises.

    Any finite representation has finitely many vertices, so this reduces to
    every box selector ranging inside its declared call list. A box whose
    calls were meant to be pairwise distinct forever can only be given up to
    its oracle table.
    """
    for name in g.reachable():
        app = g.vertices[name]
        if app.rule in ("box", "nu") and app.data[0].check():
            return False
    return True


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

@dataclass
class StructureReport:
    nwbs: List[NwbDescriptor] = field(default_factory=list)
    prebar: List[Address] = field(default_factory=list)
    depth: int = 0
    nesting: Dict[str, List[int]] = field(default_factory=dict)
    base_size: int = 0
    cosize: int = 0
    cosize_at: List[int] = field(default_factory=list)
    s: int = 0
    flags: Dict[str, bool] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "nwbs": [d.to_json() for d in self.nwbs],
            "prebar": [list(a) for a in self.prebar],
            "depth": self.depth,
            "nesting": self.nesting,
            "base_size": self.base_size,
            "cosize": self.cosize,
            "cosize_at": self.cosize_at,
            "S": self.s,
            "flags": self.flags,
        }


def criteria_flags(g: ProofGraph) -> Dict[str, bool]:
    return {
        "finitely_expandable": check_finitely_expandable(g),
        "weakly_progressing": check_weakly_progressing(g),
        "progressing": check_progressing(g),
        "weakly_regular": check_weakly_regular(g),
    }


def require_measurable(g: ProofGraph) -> Dict[str, bool]:
    if g.kind == NU:
        raise PreconditionError("nu-derivations are measured through their expansion into coderivations")
    flags = criteria_flags(g)
    failed = [k for k in ("progressing", "finitely_expandable", "weakly_regular") if not flags[k]]
    if failed:
        raise PreconditionError(f"graph is not {', '.join(failed)}")
    return flags


def boxed_tree(g: ProofGraph) -> Proof:
    """Proof tree of g in which every nwb, including cp prefixes of a box, is one box node."""
    try:
        tree = to_tree(g)
    except PreconditionError as e:
        raise PreconditionError(f"graph has infinite branches outside nwbs: {str(e)}") from None
    return absorb_spine_prefixes(tree)


def absorb_spine_prefixes(node: Proof) -> Proof:
    memo: Dict[Proof, Proof] = {}

    def go(n: Proof) -> Proof:
        if n in memo:
            return memo[n]
        if not n.premises:
            result = n
        elif n.rule == "box":
            result = R.rebuild(n, [go(c) for c in n.premises])
        elif n.rule == "cp":
            left, right = go(n.premises[0]), go(n.premises[1])
            result = _prepend_call(left, right) if right.rule == "box" else R.rebuild(n, [left, right])
        else:
            result = R.rebuild(n, [go(p) for p in n.premises])
        memo[n] = result
        return result

    return go(node)


def _prepend_call(call: Proof, spine: Proof) -> Proof:
    calls = list(spine.premises)
    if call in calls:
        index = calls.index(call)
    else:
        index = len(calls)
        calls.append(call)
    sel = spine.selector
    if sel.is_table:
        selector = Selector(len(calls), table=(index,) + sel.table)
    else:
        selector = Selector(len(calls), (index,) + sel.prefix, sel.period)
    return R.box(calls, selector)


def prebar_of(tree: Proof) -> List[Tuple[Address, Proof]]:
    """The decomposition prebar: the lowest nwb roots, one per occurrence."""
    return [(address, node) for address, node in R.walk(tree) if node.rule == "box"]


def base_of(tree: Proof) -> Proof:
    """The tree pruned at its decomposition prebar."""
    memo: Dict[Proof, Proof] = {}

    def go(n: Proof) -> Proof:
        if n in memo:
            return memo[n]
        if n.rule == "box":
            result = R.hyp(n.conclusion)
        elif not n.premises:
            result = n
        else:
            result = R.rebuild(n, [go(p) for p in n.premises])
        memo[n] = result
        return result

    return go(tree)


def support_calls(box: Proof) -> List[Proof]:
    return [box.premises[k] for k in box.selector.support()]


class _Measures:
    """Memoized depth and cosize over the sub-coderivations of one tree."""

    def __init__(self, depth_cap: int = DEFAULT_DEPTH_CAP):
        self.depth_cap = depth_cap
        self._depth: Dict[Proof, int] = {}
        self._cosize: Dict[Proof, int] = {}
        self._at: Dict[Tuple[Proof, int], int] = {}

    def depth(self, node: Proof, level: int = 0) -> int:
        if level > self.depth_cap:
            raise PreconditionError(f"nesting exceeds the depth cap of {self.depth_cap}")
        if node not in self._depth:
            inner = [self.depth(c, level + 1) + 1 for _, box in prebar_of(node) for c in support_calls(box)]
            self._depth[node] = max(inner, default=0)
        return self._depth[node]

    def cosize(self, node: Proof) -> int:
        if node not in self._cosize:
            total = base_of(node).size
            for _, box in prebar_of(node):
                total += sum(self.cosize(c) for c in support_calls(box))
            self._cosize[node] = total
        return self._cosize[node]

    def cosize_at(self, node: Proof, d: int) -> int:
        key = (node, d)
        if key not in self._at:
            if d == 0:
                value = base_of(node).size
            else:
                value = max((self.cosize_at(c, d - 1) for _, box in prebar_of(node) for c in support_calls(box)),
                            default=0)
            self._at[key] = value
        return self._at[key]


def tree_depth(tree: Proof, depth_cap: int = DEFAULT_DEPTH_CAP) -> int:
    return _Measures(depth_cap).depth(tree)


def nesting_levels(g: ProofGraph, depth_cap: int = DEFAULT_DEPTH_CAP) -> Dict[str, List[int]]:
    """Vertex -> every nesting level at which it occurs in the unfolding."""
    main = main_branch_vertices(g)
    levels: Dict[str, Set[int]] = defaultdict(set)
    seen = set()
    stack = [(g.root, 0)]
    while stack:
        name, level = stack.pop()
        if (name, level) in seen:
            continue
        if level > depth_cap:
            raise PreconditionError(f"nesting exceeds the depth cap of {depth_cap}")
        seen.add((name, level))
        levels[name].add(level)
        app = g.vertices[name]
        for k, premise in enumerate(app.premises, start=1):
            enters_call = name in main and (app.rule == "box" or k == 1)
            stack.append((premise, level + 1 if enters_call else level))
    return {name: sorted(values) for name, values in levels.items()}


def measure(g: ProofGraph, depth_cap: int = DEFAULT_DEPTH_CAP) -> StructureReport:
    """Depth, nesting, decomposition prebar, cosize and S of a measurable graph."""
    flags = require_measurable(g)
    tree = boxed_tree(g)
    measures = _Measures(depth_cap)
    depth = measures.depth(tree)
    nesting = nesting_levels(g, depth_cap)
    graph_depth = max((max(v) for v in nesting.values()), default=0)
    if graph_depth != depth:
        logger.warning(f"Nesting levels of the graph reach {graph_depth} but the tree depth is {depth}")
    report = StructureReport(
        nwbs=detect_nwbs(g),
        prebar=[a for a, _ in prebar_of(tree)],
        depth=depth,
        nesting=nesting,
        base_size=base_of(tree).size,
        cosize=measures.cosize(tree),
        cosize_at=[measures.cosize_at(tree, d) for d in range(depth + 1)],
        s=R.weights(tree)["S"],
        flags=flags,
    )
    logger.debug(f"Measured depth {report.depth}, cosize {report.cosize}, prebar of {len(report.prebar)}")
    return report


def base(g: ProofGraph) -> ProofGraph:
    """The open graph obtained by pruning g at its decomposition prebar."""
    require_measurable(g)
    return prune(g, [a for a, _ in prebar_of(boxed_tree(g))])


# ---------------------------------------------------------------------------
# Truncation
# ---------------------------------------------------------------------------

def finite_promotion(calls: Sequence[Proof]) -> Proof:
    """cp(c0, cp(c1, ... cp(cn-1, hyp))) over the common call conclusion."""
    if not calls:
        raise ValidationError("a finite promotion needs at least one call")
    proof = R.hyp(R.promote(calls[0].conclusion))
    for call in reversed(calls):
        proof = R.cp(call, proof)
    return proof


def _truncate_tree(tree: Proof, n: int, hyper: bool) -> Proof:
    memo: Dict[Proof, Proof] = {}

    def go(node: Proof) -> Proof:
        if node in memo:
            return memo[node]
        if node.rule == "box":
            sel = node.selector
            selected = [node.premises[sel.at(i)] for i in range(n)]
            result = finite_promotion([base_of(c) if hyper else go(c) for c in selected])
        elif not node.premises:
            result = node
        else:
            result = R.rebuild(node, [go(p) for p in node.premises])
        memo[node] = result
        return result

    return go(tree)


def truncate_tree(tree: Proof, n: int) -> Proof:
    if n <= 0:
        raise ValidationError(f"truncation index must be positive, got {n}")
    return _truncate_tree(tree, n, hyper=False)


def hypertruncate_tree(tree: Proof, n: int) -> Proof:
    if n <= 0:
        raise ValidationError(f"truncation index must be positive, got {n}")
    return _truncate_tree(tree, n, hyper=True)


def truncate(g: ProofGraph, n: int) -> ProofGraph:
    """The n-truncation: every nwb becomes the finite promotion of its first n truncated calls."""
    require_measurable(g)
    result = to_graph(truncate_tree(boxed_tree(g), n), cycles=False)
    logger.debug(f"{n}-truncation has {len(result.vertices)} vertices")
    return result


def hypertruncate(g: ProofGraph, n: int) -> ProofGraph:
    """The n-hypertruncation: every nwb becomes the finite promotion of the bases of its first n calls."""
    require_measurable(g)
    return to_graph(hypertruncate_tree(boxed_tree(g), n), cycles=False)
