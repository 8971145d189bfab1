#!/usr/bin/env python3
"""
Named example derivations and coderivations.

Every entry of CATALOG is a zero-argument factory returning a ProofGraph; the
CLI accepts `catalog:<name>` wherever it accepts an input file.
"""

import logging
from typing import Callable, Dict

import rules as R
from criteria import finite_promotion
from proofgraph import NU, REGULAR, ProofGraph, RuleApp, expand_nu, to_graph
from representation import bool_proof, string_proof
from selector import Selector
from syntax import Bang, DualVar, ParseError, Quest, Var

# Set up logging
logger = logging.getLogger(__name__)

X = Var("X")
NX = DualVar("X")


def zero():
    return bool_proof(0)


def one():
    return bool_proof(1)


def d_abs():
    """!A -o A * !A with A = X."""
    joined = R.tensor(R.ax(NX, X), R.ax(Quest(NX), Bang(X)), 1, 1)
    return R.par(R.ex(R.absorb(joined, 0, 1), [1, 0]), 0, 1)


def d_der():
    """!A -o A with A = X."""
    weakened = R.weaken(R.ax(NX, X), Quest(NX))
    return R.par(R.ex(R.absorb(weakened, 0, 2), [1, 0]), 0, 1)


def d_bot() -> ProofGraph:
    """Proves X by cutting an axiom against itself forever."""
    vertices = {
        "v0": RuleApp("cut", (X,), ("a", "v0"), (0, 0)),
        "a": RuleApp("ax", (NX, X), (), (NX, X)),
    }
    return ProofGraph(vertices, "v0", REGULAR)


def d_quest() -> ProofGraph:
    """Proves ?X by absorbing an X that a cut loop never finishes proving.

    The absorption chain ?X <- X, ?X <- X, X, ?X <- ... has a new sequent at
    every step, so no graph carries it; this regular coderivation keeps its
    shape: no cp rule anywhere and an infinite branch of non-logical rules.
    """
    vertices = {
        "v0": RuleApp("b", (Quest(X),), ("v1",), (0, 1)),
        "v1": RuleApp("cut", (X, Quest(X)), ("a", "v1"), (0, 0)),
        "a": RuleApp("ax", (NX, X), (), (NX, X)),
    }
    return ProofGraph(vertices, "v0", REGULAR)


def nwb_over_axioms() -> ProofGraph:
    """The non-wellfounded box ?~X, !X whose calls are all axioms."""
    vertices = {
        "v0": RuleApp("cp", (Quest(NX), Bang(X)), ("a", "v0")),
        "a": RuleApp("ax", (NX, X), (), (NX, X)),
    }
    return ProofGraph(vertices, "v0", REGULAR)


def nonprogressing() -> ProofGraph:
    """cp alternating with cut along the branch 2, 21, 212, ..."""
    promoted = (Quest(NX), Bang(X))
    vertices = {
        "v0": RuleApp("cp", promoted, ("a", "v1")),
        "v1": RuleApp("cut", promoted, ("v0", "i"), (1, 0)),
        "a": RuleApp("ax", (NX, X), (), (NX, X)),
        "i": RuleApp("ax", promoted, (), promoted),
    }
    return ProofGraph(vertices, "v0", REGULAR)


def bit_stream(prefix=(), period=(1, 0), table=None) -> ProofGraph:
    """nu over the calls [<0>, <1>] read by the given selector."""
    selector = Selector.from_table(2, table) if table is not None else Selector.periodic(2, prefix, period)
    graph = to_graph(R.nu([zero(), one()], selector))
    graph.kind = NU
    logger.debug(f"Built a bit stream over {selector.horizon()} selector positions")
    return graph


def bit_box(prefix=(), period=(1, 0), table=None) -> ProofGraph:
    return expand_nu(bit_stream(prefix, period, table))


def identity_stream() -> R.Proof:
    """nu over one axiom call, the nu counterpart of fp(ax)."""
    return R.nu([R.ax(NX, X)], Selector.constant(1))


def string_graph(s: str) -> ProofGraph:
    return to_graph(string_proof(s))


CATALOG: Dict[str, Callable[[], ProofGraph]] = {
    "zero": lambda: to_graph(zero()),
    "one": lambda: to_graph(one()),
    "d_abs": lambda: to_graph(d_abs()),
    "d_der": lambda: to_graph(d_der()),
    "d_bot": d_bot,
    "d_quest": d_quest,
    "nwb_over_axioms": nwb_over_axioms,
    "fp_over_axiom": lambda: to_graph(R.fp(R.ax(NX, X))),
    "nonprogressing": nonprogressing,
    "finite_promotion": lambda: to_graph(finite_promotion([zero(), one()])),
    "bit_stream": bit_stream,
    "bit_box": bit_box,
    "string_01": lambda: string_graph("01"),
}


def lookup(name: str) -> ProofGraph:
    if name not in CATALOG:
        raise ParseError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}")
    return CATALOG[name]()
