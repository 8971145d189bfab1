#!/usr/bin/env python3
"""
Exponential graphs and exponential flows at nesting level 0.

Nodes are the ?- and !-formula occurrences of the finite structure of a boxed
proof tree, with every box unrolled along its main branch up to a horizon. A
node is identified by the address of the rule concluding it and its position
in that conclusion. Occurrences in the left premise of a promotion lie at a
higher nesting level and are not part of the graph.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx

import rules as R
from criteria import boxed_tree, require_measurable
from cutelim import CutStep, apply_step
from proofgraph import ProofGraph
from rules import Address, Proof
from syntax import Bang, PreconditionError, Quest, StepLimitExceeded, render

# Set up logging
logger = logging.getLogger(__name__)

DEFAULT_FLOW_CAP = 10**5
DEFAULT_HORIZON = 3

NodeId = Tuple[Address, int]

CLASS_COLOURS = {"b": "orange", "w": "grey", "p": "blue", "a": "green", "bang": "black", "quest": "black"}


@dataclass(frozen=True)
class ExpNode:
    address: Address
    position: int
    formula: object
    cls: str
    nwb: Optional[Address] = None
    key: Optional[Tuple[Address, int]] = None
    frontier: bool = False

    @property
    def is_bang(self) -> bool:
        return isinstance(self.formula, Bang)


@dataclass
class ExpGraph:
    graph: nx.DiGraph
    nodes: Dict[NodeId, ExpNode]
    horizon: int = DEFAULT_HORIZON

    def of_class(self, cls: str) -> List[NodeId]:
        return [n for n, node in self.nodes.items() if node.cls == cls]

    def rank(self) -> int:
        return len(self.of_class("b"))

    def nwbs(self) -> List[Address]:
        return sorted({node.nwb for node in self.nodes.values() if node.nwb is not None})

    def keys(self) -> Dict[Tuple[Address, int], NodeId]:
        return {node.key: n for n, node in self.nodes.items() if node.key is not None}

    def to_dot(self) -> str:
        return exp_graph_to_dot(self)


@dataclass
class Flow:
    nodes: Tuple[NodeId, ...]
    b_count: int
    p_counts: Dict[Address, int] = field(default_factory=dict)
    truncated: bool = False
    balanced: bool = False

    def crosses(self, node: NodeId) -> bool:
        return node in self.nodes

    def to_json(self) -> dict:
        return {
            "nodes": [[list(a), p] for a, p in self.nodes],
            "b": self.b_count,
            "p": {".".join(map(str, k)) or "root": v for k, v in self.p_counts.items()},
            "truncated": self.truncated,
            "balanced": self.balanced,
        }


def _exponential(f) -> bool:
    return isinstance(f, (Bang, Quest))


def _spine_sites(tree: Proof, horizon: int) -> Iterator[Tuple[Address, Proof, Optional[Address], bool]]:
    """Rule occurrences of nesting level 0 as (address, node, nwb, frontier).

    A box is replaced by horizon unfoldings of its main branch; the box left
    at the end of the unrolled branch is a frontier. nwb is the address of the
    lowest promotion of the main branch a cp belongs to.
    """
    stack: List[Tuple[Address, Proof, Optional[Address], int]] = [((), tree, None, 0)]
    while stack:
        address, node, nwb, unrolled = stack.pop()
        if node.rule == "box":
            nwb = address if nwb is None else nwb
            if unrolled >= horizon:
                yield address, node, nwb, True
                continue
            node = R.unfold_box(node)
            yield address, node, nwb, False
            stack.append((address + (2,), node.premises[1], nwb, unrolled + 1))
            continue
        if node.rule == "cp":
            nwb = address if nwb is None else nwb
            yield address, node, nwb, False
            stack.append((address + (2,), node.premises[1], nwb, unrolled))
            continue
        yield address, node, None, False
        if node.rule in ("fp", "nu"):
            continue
        for k in range(len(node.premises) - 1, -1, -1):
            stack.append((address + (k + 1,), node.premises[k], None, 0))


def _classify(node: Proof, position: int, nwb: Optional[Address]) -> str:
    last = len(node.conclusion) - 1
    if node.rule == "b" and position == last:
        return "b"
    if node.rule == "w" and position == last:
        return "w"
    if nwb is not None and node.rule in ("cp", "box"):
        return "p" if position == last else "a"
    return "bang" if isinstance(node.conclusion[position], Bang) else "quest"


def _add_context_edges(graph: nx.DiGraph, address: Address, node: Proof):
    if node.rule in ("fp", "nu", "box") or not node.premises:
        return
    parents = R.parent_map(node.rule, node.data, [p.conclusion for p in node.premises])
    for n, sources in enumerate(parents):
        f = node.conclusion[n]
        if not _exponential(f):
            continue
        for k, m in sources:
            if node.rule == "cp" and k == 0:
                continue
            if node.premises[k].conclusion[m] != f:
                continue
            below, above = (address, n), (address + (k + 1,), m)
            if isinstance(f, Quest):
                graph.add_edge(below, above)
            else:
                graph.add_edge(above, below)


def build_exp_graph(source: Union[Proof, ProofGraph], horizon: int = DEFAULT_HORIZON,
                    relabel: bool = True) -> ExpGraph:
    """Exponential graph of a boxed proof tree or of a measurable proof graph.

    Node keys come from the origin addresses of the tree; with relabel set the
    tree is first labelled with its own addresses.
    """
    if isinstance(source, ProofGraph):
        require_measurable(source)
        tree = boxed_tree(source)
    else:
        tree = source
    if relabel:
        tree = R.label(tree)
    graph = nx.DiGraph()
    nodes: Dict[NodeId, ExpNode] = {}
    for address, node, nwb, frontier in _spine_sites(tree, horizon):
        for n, f in enumerate(node.conclusion):
            if not _exponential(f):
                continue
            key = None if node.origin is None else (node.origin, n)
            nodes[(address, n)] = ExpNode(address, n, f, _classify(node, n, nwb), nwb, key, frontier)
            graph.add_node((address, n))
        if frontier:
            continue
        last = len(node.conclusion) - 1
        if node.rule == "ax":
            a, b = node.conclusion
            if isinstance(a, Quest) and isinstance(b, Bang):
                graph.add_edge((address, 0), (address, 1))
            elif isinstance(b, Quest) and isinstance(a, Bang):
                graph.add_edge((address, 1), (address, 0))
        elif node.rule == "cp":
            for n in range(last):
                graph.add_edge((address, n), (address, last))
        elif node.rule == "b":
            graph.add_edge((address, last), (address + (1,), node.data[1]))
        elif node.rule == "cut":
            i, j = node.data
            bang, quest = (address + (1,), i), (address + (2,), j)
            if isinstance(node.premises[1].conclusion[j], Bang):
                bang, quest = quest, bang
            if _exponential(node.premises[0].conclusion[i]):
                graph.add_edge(bang, quest)
        _add_context_edges(graph, address, node)
    # edges may point at occurrences above a frontier or inside calls
    graph.remove_nodes_from([n for n in list(graph.nodes) if n not in nodes])
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        raise PreconditionError(f"exponential graph has a cycle through {cycle[0][0]}")
    eg = ExpGraph(graph, nodes, horizon)
    logger.debug(f"Exponential graph: {len(nodes)} nodes, {graph.number_of_edges()} edges, rank {eg.rank()}")
    return eg


def rank(eg: ExpGraph) -> int:
    """Number of b-nodes."""
    return eg.rank()


def tree_rank(tree: Proof) -> int:
    return build_exp_graph(tree, horizon=1).rank()


def _measure(eg: ExpGraph, path: Sequence[NodeId]) -> Flow:
    nodes = [eg.nodes[n] for n in path]
    b_count = sum(1 for node in nodes if node.cls == "b")
    p_counts: Dict[Address, int] = {}
    for node in nodes:
        if node.cls == "p":
            p_counts[node.nwb] = p_counts.get(node.nwb, 0) + 1
    balanced = all(node.cls == "p" for node in nodes if node.is_bang)
    if balanced:
        for k, node in enumerate(nodes):
            # the principal !-formula of a crossed nwb is its lowest p-node
            if node.cls == "p" and node.address == node.nwb:
                suffix_b = sum(1 for later in nodes[k:] if later.cls == "b")
                if p_counts[node.nwb] <= suffix_b:
                    balanced = False
                    break
    return Flow(tuple(path), b_count, p_counts, nodes[-1].frontier if nodes else False, balanced)


def enumerate_flows(eg: ExpGraph, cap: int = DEFAULT_FLOW_CAP) -> List[Flow]:
    """Maximal directed paths, from nodes without predecessors to nodes without successors."""
    graph = eg.graph
    flows: List[Flow] = []
    sources = sorted(n for n in graph.nodes if graph.in_degree(n) == 0)
    for source in sources:
        stack = [(source, [source])]
        while stack:
            current, path = stack.pop()
            successors = sorted(graph.successors(current))
            if not successors:
                flows.append(_measure(eg, path))
                if len(flows) > cap:
                    raise StepLimitExceeded(f"more than {cap} exponential flows", len(flows))
                continue
            for nxt in reversed(successors):
                stack.append((nxt, path + [nxt]))
    logger.debug(f"Enumerated {len(flows)} exponential flows")
    return flows


def flow_residues(tree: Proof, step: CutStep, flow: Flow, horizon: int = DEFAULT_HORIZON,
                  cap: int = DEFAULT_FLOW_CAP) -> List[Flow]:
    """Flows of the reduct whose shared nodes are all crossed by flow.

    flow must come from build_exp_graph(tree) with the default labelling. A
    residue has to cross at least one node shared with the graph of tree, and
    every edge it takes that tree's graph already had must be an edge of flow.
    """
    labelled = R.label(tree)
    before = build_exp_graph(labelled, horizon, relabel=False)
    path = [before.nodes[n].key for n in flow.nodes if n in before.nodes]
    crossed = set(path)
    taken = set(zip(path, path[1:]))
    shared_keys = set(before.keys())
    old_edges = {(before.nodes[u].key, before.nodes[v].key) for u, v in before.graph.edges}
    reduct = apply_step(labelled, step)
    after = build_exp_graph(reduct, horizon, relabel=False)
    residues = []
    for candidate in enumerate_flows(after, cap):
        seq = [after.nodes[n].key for n in candidate.nodes]
        keys = set(seq) & shared_keys
        edges = {e for e in zip(seq, seq[1:]) if e in old_edges}
        if keys and keys <= crossed and edges <= taken:
            residues.append(candidate)
    logger.debug(f"{step.kind} leaves {len(residues)} residues of a flow of length {len(flow.nodes)}")
    return residues


def exp_graph_to_dot(eg: ExpGraph) -> str:
    def name(n: NodeId) -> str:
        address, position = n
        return '"' + (".".join(map(str, address)) or "root") + f":{position}" + '"'

    lines = ["digraph exponential {", "  node [shape=ellipse];"]
    for n, node in sorted(eg.nodes.items()):
        label = render(node.formula).replace('"', '\\"')
        colour = CLASS_COLOURS.get(node.cls, "black")
        style = ', style=dashed' if node.frontier else ''
        lines.append(f'  {name(n)} [label="{label} ({node.cls})", color={colour}{style}];')
    for a, b in sorted(eg.graph.edges):
        lines.append(f"  {name(a)} -> {name(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
