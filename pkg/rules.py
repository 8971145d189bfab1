#!/usr/bin/env python3
"""
Rule schemas and proof trees.

Sequents are ordered. The principal formula of a logical rule is always the
last formula of its conclusion and active formulas are addressed by position.
One schema, compute_conclusion, is shared by the tree constructors below and
by the vertex checks of proofgraph.

Rule data (positional):
    ax      (A, B)            B must be dual to A
    one     ()
    hyp     (formulas,)       open leaf with an arbitrary declared conclusion
    cut     (i, j)            p[i] dual to q[j]; conclusion p\\i, q\\j
    tensor  (i, j)            p\\i, q\\j, p[i] * q[j]
    par     (i, j)            p\\{i,j}, p[i] | p[j]
    bot     ()                p, bot
    w       (?A,)             p, ?A
    b       (i, j)            p[i] = A, p[j] = ?A; conclusion p\\{i,j}, ?A
    forall  (i, X)            p\\i, all X. p[i]      (X not free in p\\i)
    exists  (i, ex X.A, B)    p[i] = A[B/X], B free of ! and ?
    fp      ()                premise G, A; conclusion ?G, !A
    cp      ()                premises G, A and ?G, !A
    box     (selector,)       non-wellfounded box over a finite call list
    nu      (selector,)       infinitely branching promotion over its calls
    ex      (perm,)           conclusion[k] = p[perm[k]]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from selector import Selector
from syntax import (
    BOT,
    ONE,
    Bang,
    Exists,
    Forall,
    Formula,
    Quest,
    Tensor,
    Par,
    ValidationError,
    Var,
    all_vars,
    alpha_eq,
    free_vars,
    fresh_name,
    is_banged_quest_free,
    is_dual,
    negate,
    render,
    sequents_alpha_eq,
    substitute,
)

# Set up logging
logger = logging.getLogger(__name__)

ARITY = {
    "ax": 0, "one": 0, "hyp": 0,
    "cut": 2, "tensor": 2, "cp": 2,
    "par": 1, "bot": 1, "w": 1, "b": 1, "forall": 1, "exists": 1, "fp": 1, "ex": 1,
}
VARIADIC = {"box", "nu"}
RULES = tuple(ARITY) + tuple(sorted(VARIADIC))
PROMOTIONS = {"fp", "cp", "box", "nu"}
# rules whose last conclusion formula is principal
LAST_PRINCIPAL = {"tensor", "par", "bot", "w", "b", "forall", "exists", "fp", "cp", "box", "nu"}

Address = Tuple[int, ...]


def drop(seq: Sequence, *positions: int) -> tuple:
    skip = set(positions)
    return tuple(x for k, x in enumerate(seq) if k not in skip)


def promote(seq: Sequence[Formula]) -> Tuple[Formula, ...]:
    """G, A  |->  ?G, !A."""
    return tuple(Quest(g) for g in seq[:-1]) + (Bang(seq[-1]),)


def _index(seq, i, rule):
    if not isinstance(i, int) or not 0 <= i < len(seq):
        raise ValidationError(f"{rule}: position {i} out of range for a sequent of length {len(seq)}")
    return seq[i]


def compute_conclusion(rule: str, data: tuple, premises: Sequence[Sequence[Formula]]) -> Tuple[Formula, ...]:
    """Conclusion of rule applied to premise conclusions, or ValidationError."""
    if rule not in ARITY and rule not in VARIADIC:
        raise ValidationError(f"unknown rule {rule!r}")
    if rule in ARITY and len(premises) != ARITY[rule]:
        raise ValidationError(f"{rule}: expected {ARITY[rule]} premises, got {len(premises)}")

    if rule == "ax":
        a, b = data
        if not is_dual(a, b):
            raise ValidationError(f"ax: {render(a)} and {render(b)} are not dual")
        return (a, b)
    if rule == "one":
        return (ONE,)
    if rule == "hyp":
        return tuple(data[0])
    if rule == "cut":
        p, q = premises
        i, j = data[0], data[1]
        a, b = _index(p, i, rule), _index(q, j, rule)
        if not is_dual(a, b):
            raise ValidationError(f"cut: {render(a)} and {render(b)} are not dual")
        return drop(p, i) + drop(q, j)
    if rule == "tensor":
        p, q = premises
        i, j = data
        return drop(p, i) + drop(q, j) + (Tensor(_index(p, i, rule), _index(q, j, rule)),)
    if rule == "par":
        (p,) = premises
        i, j = data
        if i == j:
            raise ValidationError("par: active positions must differ")
        return drop(p, i, j) + (Par(_index(p, i, rule), _index(p, j, rule)),)
    if rule == "bot":
        return tuple(premises[0]) + (BOT,)
    if rule == "w":
        (a,) = data
        if not isinstance(a, Quest):
            raise ValidationError(f"w: weakened formula {render(a)} is not a ?-formula")
        return tuple(premises[0]) + (a,)
    if rule == "b":
        (p,) = premises
        i, j = data
        a, q = _index(p, i, rule), _index(p, j, rule)
        if i == j or not isinstance(q, Quest) or not alpha_eq(q.body, a):
            raise ValidationError(f"b: positions {i}, {j} do not hold A and ?A")
        return drop(p, i, j) + (q,)
    if rule == "forall":
        (p,) = premises
        i, var = data
        body = _index(p, i, rule)
        rest = drop(p, i)
        if any(var in free_vars(f) for f in rest):
            raise ValidationError(f"forall: eigenvariable {var} is free in the context")
        return rest + (Forall(var, body),)
    if rule == "exists":
        (p,) = premises
        i, formula, witness = data
        if not isinstance(formula, Exists):
            raise ValidationError(f"exists: {render(formula)} is not existential")
        if not is_banged_quest_free(witness):
            raise ValidationError(f"exists: witness {render(witness)} contains ! or ?")
        if not alpha_eq(substitute(formula.body, formula.var, witness), _index(p, i, rule)):
            raise ValidationError(f"exists: premise formula is not {render(formula)} instantiated by {render(witness)}")
        return drop(p, i) + (formula,)
    if rule == "fp":
        (p,) = premises
        if not p:
            raise ValidationError("fp: premise sequent is empty")
        return promote(p)
    if rule == "cp":
        left, right = premises
        if not left:
            raise ValidationError("cp: left premise sequent is empty")
        if not sequents_alpha_eq(promote(left), right):
            raise ValidationError(f"cp: right premise {render(list(right))} is not the promotion of {render(list(left))}")
        return tuple(right)
    if rule in VARIADIC:
        (selector,) = data
        if not premises:
            raise ValidationError(f"{rule}: needs at least one call")
        if selector.calls != len(premises):
            raise ValidationError(f"{rule}: selector ranges over {selector.calls} calls but {len(premises)} are given")
        problems = selector.check()
        if problems:
            raise ValidationError(f"{rule}: " + "; ".join(problems))
        first = premises[0]
        if not first:
            raise ValidationError(f"{rule}: call sequent is empty")
        for k, other in enumerate(premises[1:], start=1):
            if not sequents_alpha_eq(first, other):
                raise ValidationError(f"{rule}: call {k} proves {render(list(other))} instead of {render(list(first))}")
        return promote(first)
    if rule == "ex":
        (p,) = premises
        (perm,) = data
        if sorted(perm) != list(range(len(p))):
            raise ValidationError(f"ex: {list(perm)} is not a permutation of {len(p)} positions")
        return tuple(p[k] for k in perm)
    raise ValidationError(f"unknown rule {rule!r}")


def parent_map(rule: str, data: tuple, premises: Sequence[Sequence[Formula]]) -> List[List[Tuple[int, int]]]:
    """For each conclusion position, the (premise, position) pairs it descends from."""
    def context(k, seq, *skip):
        return [[(k, n)] for n in range(len(seq)) if n not in skip]

    if rule in ("ax", "one", "hyp"):
        width = 2 if rule == "ax" else 1 if rule == "one" else len(data[0])
        return [[] for _ in range(width)]
    if rule == "cut":
        i, j = data[0], data[1]
        return context(0, premises[0], i) + context(1, premises[1], j)
    if rule == "tensor":
        i, j = data
        return context(0, premises[0], i) + context(1, premises[1], j) + [[(0, i), (1, j)]]
    if rule in ("par", "b"):
        i, j = data
        return context(0, premises[0], i, j) + [[(0, i), (0, j)]]
    if rule in ("bot", "w"):
        return context(0, premises[0]) + [[]]
    if rule in ("forall", "exists"):
        i = data[0]
        return context(0, premises[0], i) + [[(0, i)]]
    if rule == "fp":
        return [[(0, n)] for n in range(len(premises[0]))]
    if rule == "cp":
        return [[(0, n), (1, n)] for n in range(len(premises[0]))]
    if rule in VARIADIC:
        return [[(c, n) for c in range(len(premises))] for n in range(len(premises[0]))]
    if rule == "ex":
        return [[(0, k)] for k in data[0]]
    raise ValidationError(f"unknown rule {rule!r}")


def principal_positions(rule: str, width: int) -> Tuple[int, ...]:
    if rule == "ax":
        return (0, 1)
    if rule == "one":
        return (0,)
    if rule in LAST_PRINCIPAL:
        return (width - 1,)
    return ()


# ---------------------------------------------------------------------------
# Proof trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Proof:
    """An immutable proof tree node.

    box nodes stand for a whole non-wellfounded box; their premises are the
    distinct calls and their children in the unfolded tree are virtual
    (see unfold_box). tag labels cuts for residue tracking and origin records
    the address a node had in a labelled ancestor tree; neither takes part in
    equality.
    """

    rule: str
    premises: Tuple["Proof", ...]
    data: tuple
    conclusion: Tuple[Formula, ...]
    tag: Optional[str] = None
    origin: Optional[Address] = None
    _key: int = field(init=False, repr=False, default=0)
    size: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_key", hash((self.rule, self.data, tuple(p._key for p in self.premises))))
        own = 0 if self.rule == "ex" else 1
        object.__setattr__(self, "size", own + sum(p.size for p in self.premises))

    def __hash__(self):
        return self._key

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Proof) or self._key != other._key:
            return False
        return self.rule == other.rule and self.data == other.data and self.premises == other.premises

    def __repr__(self):
        return f"Proof({self.rule}, {render(list(self.conclusion))})"

    @property
    def selector(self) -> Selector:
        return self.data[0]


def make(rule: str, premises: Sequence[Proof], data: tuple = (), tag=None, origin=None) -> Proof:
    premises = tuple(premises)
    conclusion = compute_conclusion(rule, data, [p.conclusion for p in premises])
    return Proof(rule, premises, tuple(data), conclusion, tag, origin)


def rebuild(node: Proof, premises: Sequence[Proof], data: Optional[tuple] = None) -> Proof:
    """Same rule, tag and origin over new premises."""
    return make(node.rule, premises, node.data if data is None else data, node.tag, node.origin)


def ax(a: Formula, b: Optional[Formula] = None) -> Proof:
    return make("ax", (), (a, negate(a) if b is None else b))


def one() -> Proof:
    return make("one", ())


def hyp(formulas: Sequence[Formula]) -> Proof:
    return make("hyp", (), (tuple(formulas),))


def cut(p: Proof, q: Proof, i: int, j: int, tag=None) -> Proof:
    return make("cut", (p, q), (i, j), tag=tag)


def tensor(p: Proof, q: Proof, i: int, j: int) -> Proof:
    return make("tensor", (p, q), (i, j))


def par(p: Proof, i: int, j: int) -> Proof:
    return make("par", (p,), (i, j))


def bot(p: Proof) -> Proof:
    return make("bot", (p,))


def weaken(p: Proof, formula: Formula) -> Proof:
    return make("w", (p,), (formula,))


def absorb(p: Proof, i: int, j: int) -> Proof:
    return make("b", (p,), (i, j))


def forall(p: Proof, i: int, var: str) -> Proof:
    return make("forall", (p,), (i, var))


def exists(p: Proof, i: int, formula: Formula, witness: Formula) -> Proof:
    return make("exists", (p,), (i, formula, witness))


def fp(p: Proof) -> Proof:
    return make("fp", (p,))


def cp(left: Proof, right: Proof) -> Proof:
    return make("cp", (left, right))


def box(calls: Sequence[Proof], selector: Selector) -> Proof:
    return make("box", tuple(calls), (selector,))


def nu(calls: Sequence[Proof], selector: Selector) -> Proof:
    return make("nu", tuple(calls), (selector,))


def ex(p: Proof, perm: Sequence[int]) -> Proof:
    """Exchange; identities vanish and nested exchanges compose."""
    perm = tuple(perm)
    if perm == tuple(range(len(p.conclusion))):
        return p
    if p.rule == "ex":
        inner = p.data[0]
        return ex(p.premises[0], tuple(inner[k] for k in perm))
    return make("ex", (p,), (perm,))


def move_to_end(p: Proof, i: int) -> Proof:
    n = len(p.conclusion)
    return ex(p, [k for k in range(n) if k != i] + [i])


def move_to_front(p: Proof, i: int) -> Proof:
    n = len(p.conclusion)
    return ex(p, [i] + [k for k in range(n) if k != i])


def arrange(p: Proof, labels: Sequence, target: Sequence) -> Proof:
    """Reorder p, whose conclusion carries labels, into the target label order."""
    where = {label: k for k, label in enumerate(labels)}
    if len(where) != len(labels) or set(where) != set(target):
        raise ValidationError(f"cannot arrange {list(labels)} into {list(target)}")
    return ex(p, [where[t] for t in target])


def weaken_many(p: Proof, formulas: Sequence[Formula]) -> Proof:
    for f in formulas:
        p = weaken(p, f)
    return p


# ---------------------------------------------------------------------------
# Navigation
# ---------------------------------------------------------------------------

def unfold_box(node: Proof) -> Proof:
    """box over calls with selector S  |->  cp(call S(0), box with S shifted by one)."""
    sel = node.selector
    head = node.premises[sel.at(0)]
    origin = None if node.origin is None else node.origin + (2,)
    tail = Proof("box", node.premises, (sel.shift(1),), node.conclusion, node.tag, origin)
    return Proof("cp", (head, tail), (), node.conclusion, None, node.origin)


def children(node: Proof) -> Tuple[Proof, ...]:
    """Children in the (possibly infinite) unfolded tree."""
    if node.rule == "box":
        return unfold_box(node).premises
    return node.premises


def subproof(node: Proof, address: Address) -> Proof:
    for step in address:
        kids = children(node)
        if not 1 <= step <= len(kids):
            raise ValidationError(f"address step {step} leaves the tree at rule {node.rule}")
        node = kids[step - 1]
    return node


def replace(node: Proof, address: Address, new: Proof) -> Proof:
    """node with the subtree at address replaced; boxes on the path are unfolded."""
    if not address:
        return new
    current = unfold_box(node) if node.rule == "box" else node
    step = address[0]
    kids = list(current.premises)
    kids[step - 1] = replace(kids[step - 1], address[1:], new)
    return Proof(current.rule, tuple(kids), current.data, current.conclusion, current.tag, current.origin)


def walk(node: Proof, address: Address = (), into_calls: bool = True) -> Iterator[Tuple[Address, Proof]]:
    """Pre-order walk of the finite structure.

    Boxes are leaves of the walk. With into_calls False the left premises of
    cp (the calls) are skipped, giving the nodes of nesting level 0.
    """
    stack = [(address, node)]
    while stack:
        addr, current = stack.pop()
        yield addr, current
        if current.rule == "box":
            continue
        kids = current.premises
        for k in range(len(kids) - 1, -1, -1):
            if not into_calls and current.rule == "cp" and k == 0:
                continue
            stack.append((addr + (k + 1,), kids[k]))


def box_call_address(node: Proof, call: int, limit: int = 10_000) -> Optional[Address]:
    """Address, relative to the box, of the first position selecting call."""
    sel = node.selector
    bound = min(sel.horizon(), limit)
    for i in range(bound):
        if sel.at(i) == call:
            return (2,) * i + (1,)
    return None


def is_cut_free(node: Proof) -> bool:
    for _, n in walk(node):
        if n.rule == "cut":
            return False
        if n.rule == "box" and not all(is_cut_free(c) for c in n.premises):
            return False
    return True


def count_rules(node: Proof, rules) -> int:
    return sum(1 for _, n in walk(node) if n.rule in rules)


def has_boxes(node: Proof) -> bool:
    return any(n.rule == "box" for _, n in walk(node))


def strip_tags(node: Proof) -> Proof:
    if node.tag is None and node.origin is None and not node.premises:
        return node
    premises = tuple(strip_tags(p) for p in node.premises)
    return Proof(node.rule, premises, node.data, node.conclusion)


def label(node: Proof, address: Address = ()) -> Proof:
    """Copy of node whose every node records its own address as origin."""
    if node.rule == "box":
        return Proof(node.rule, node.premises, node.data, node.conclusion, node.tag, address)
    premises = tuple(label(p, address + (k + 1,)) for k, p in enumerate(node.premises))
    return Proof(node.rule, premises, node.data, node.conclusion, node.tag, address)


def rename_eigenvariables(node: Proof, avoid) -> Proof:
    """Alpha-rename every forall eigenvariable of node that occurs in avoid."""
    avoid = set(avoid)

    def go(n: Proof) -> Proof:
        if n.rule == "forall":
            (premise,) = n.premises
            i, var = n.data
            if var in avoid:
                taken = avoid | _vars_of(premise)
                new_var = fresh_name(var, taken)
                premise = subst_proof(premise, var, Var(new_var))
                return make("forall", (go(premise),), (i, new_var), n.tag, n.origin)
        if not n.premises:
            return n
        return rebuild(n, [go(p) for p in n.premises])

    return go(node)


def _vars_of(node: Proof) -> set:
    names = set()
    for _, n in walk(node):
        for f in n.conclusion:
            names |= all_vars(f)
        if n.rule == "forall":
            names.add(n.data[1])
        for c in (n.premises if n.rule == "box" else ()):
            names |= _vars_of(c)
    return names


def subst_proof(node: Proof, var: str, witness: Formula) -> Proof:
    """Substitute witness for the free type variable var in every formula of node."""
    if var not in _free_in(node):
        return node
    clash = free_vars(witness)
    if node.rule == "forall":
        (premise,) = node.premises
        i, eigen = node.data
        if eigen == var:
            return node
        if eigen in clash:
            node = rename_eigenvariables(node, clash | {var})
            (premise,) = node.premises
            i, eigen = node.data
        return make("forall", (subst_proof(premise, var, witness),), (i, eigen), node.tag, node.origin)
    premises = [subst_proof(p, var, witness) for p in node.premises]
    data = _subst_data(node.rule, node.data, var, witness)
    return make(node.rule, premises, data, node.tag, node.origin)


def _subst_data(rule, data, var, witness):
    if rule == "ax":
        return tuple(substitute(f, var, witness) for f in data)
    if rule == "hyp":
        return (tuple(substitute(f, var, witness) for f in data[0]),)
    if rule == "w":
        return (substitute(data[0], var, witness),)
    if rule == "exists":
        i, formula, w = data
        return (i, substitute(formula, var, witness), substitute(w, var, witness))
    return data


def _free_in(node: Proof) -> set:
    names = set()
    for f in node.conclusion:
        names |= free_vars(f)
    # eigenvariables are free in premises but bound in the conclusion
    stack = [node]
    while stack:
        n = stack.pop()
        for f in n.conclusion:
            names |= free_vars(f)
        if n.rule == "forall":
            names.add(n.data[1])
        stack.extend(n.premises)
    return names


def weights(node: Proof) -> Dict[str, int]:
    """S (max ?-context of a promotion), C (promotions) and M (other non-exchange rules)."""
    s = c = m = 0
    stack = [node]
    while stack:
        n = stack.pop()
        if n.rule in PROMOTIONS:
            c += 1
            s = max(s, len(n.conclusion) - 1)
        elif n.rule != "ex":
            m += 1
        stack.extend(n.premises)
    return {"S": s, "C": c, "M": m}
