#!/usr/bin/env python3
"""
Cut-elimination steps.

Steps rewrite proof trees in which every nwb is a box node. A cut is located
by its address in the finite structure (boxes are never entered); exchange
rules above the cut are absorbed before the redex is classified. Every step
preserves the conclusion of the cut, including the order of its formulas.

Internally the two premises carry labelled conclusions so that each rewrite
can be written by naming formula occurrences instead of positions.
"""

from __future__ import annotations

import itertools
import logging
from collections import namedtuple
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import rules as R
from rules import Address, Proof
from selector import Selector, fuse
from syntax import Bang, Quest, StepError, ValidationError, free_vars, render

# Set up logging
logger = logging.getLogger(__name__)

MULTIPLICATIVE = {"mult-ax", "mult-tensor-par", "mult-one-bot"}
EXPONENTIAL = {"fp-fp", "fp-w", "fp-b", "nu-nu", "nu-w", "nu-b", "cp-cp", "cp-w", "cp-b"}
COMMUTATIVE = {"comm-1", "comm-2"}
KINDS = sorted(MULTIPLICATIVE | EXPONENTIAL | COMMUTATIVE | {"so-forall-exists"})

_UNARY = {"par", "bot", "w", "b", "forall", "exists"}
_FAMILY = {"fp": "fp", "nu": "nu", "cp": "cp", "box": "cp"}


@dataclass(frozen=True)
class CutStep:
    kind: str
    address: Address
    shallow: bool = True
    bordered: bool = False
    tag: Optional[str] = None
    through_cut: bool = False

    @property
    def height(self) -> int:
        return len(self.address)

    @property
    def principal(self) -> bool:
        return self.kind not in COMMUTATIVE

    def to_json(self) -> dict:
        return {"kind": self.kind, "address": list(self.address), "shallow": self.shallow,
                "bordered": self.bordered, "tag": self.tag, "through_cut": self.through_cut}


# ---------------------------------------------------------------------------
# Labelled proofs
# ---------------------------------------------------------------------------

_fresh_ids = itertools.count()
_Ref = namedtuple("_Ref", "premise label")


def _fresh():
    return ("f", next(_fresh_ids))


class _LP:
    """A proof together with one label per conclusion formula."""

    __slots__ = ("proof", "labels")

    def __init__(self, proof: Proof, labels):
        self.proof = proof
        self.labels = list(labels)

    def at(self, label) -> int:
        return self.labels.index(label)

    def relabel(self, old, new) -> "_LP":
        return _LP(self.proof, [new if l == old else l for l in self.labels])

    def arranged(self, target) -> "_LP":
        return _LP(R.arrange(self.proof, self.labels, target), target)


def _peel(lp: _LP) -> _LP:
    """Push exchanges into the labels."""
    proof, labels = lp.proof, lp.labels
    while proof.rule == "ex":
        (perm,) = proof.data
        inner = [None] * len(perm)
        for k, m in enumerate(perm):
            inner[m] = labels[k]
        proof, labels = proof.premises[0], inner
    return _LP(proof, labels)


def _premise_lps(lp: _LP) -> List[_LP]:
    """Premises labelled so that context formulas keep the label they have below."""
    node = lp.proof
    parents = R.parent_map(node.rule, node.data, [p.conclusion for p in node.premises])
    principal = set(R.principal_positions(node.rule, len(node.conclusion)))
    out = [[None] * len(p.conclusion) for p in node.premises]
    for n, sources in enumerate(parents):
        if n in principal:
            continue
        for k, m in sources:
            out[k][m] = lp.labels[n]
    return [_LP(p, [l if l is not None else _fresh() for l in labels]) for p, labels in zip(node.premises, out)]


def _build(rule: str, lps: List[_LP], data: tuple = (), principal_label=None, tag=None) -> _LP:
    resolved = tuple(lps[d.premise].at(d.label) if isinstance(d, _Ref) else d for d in data)
    proof = R.make(rule, [lp.proof for lp in lps], resolved, tag)
    parents = R.parent_map(rule, resolved, [lp.proof.conclusion for lp in lps])
    principal = set(R.principal_positions(rule, len(proof.conclusion)))
    labels = []
    for n, sources in enumerate(parents):
        if n in principal:
            labels.append(principal_label)
        else:
            k, m = sources[-1]
            labels.append(lps[k].labels[m])
    return _LP(proof, labels)


def _cut(a: _LP, b: _LP, la, lb, tag=None) -> _LP:
    return _build("cut", [a, b], (_Ref(0, la), _Ref(1, lb)), tag=tag)


def _unfolded(lp: _LP) -> _LP:
    if lp.proof.rule == "box":
        return _LP(R.unfold_box(lp.proof), lp.labels)
    return lp


# ---------------------------------------------------------------------------
# Principal steps
# ---------------------------------------------------------------------------

def _mult_ax(axiom: _LP, c_ax, other: _LP, c_other, tag) -> _LP:
    (remaining,) = [l for l in axiom.labels if l != c_ax]
    return other.relabel(c_other, remaining)


def _tensor_par(t: _LP, ct, p: _LP, cp_, tag) -> _LP:
    t1, t2 = _premise_lps(t)
    (p1,) = _premise_lps(p)
    ti, tj = t.proof.data
    pa, pb = p.proof.data
    inner = _cut(p1, t1, p1.labels[pa], t1.labels[ti])
    return _cut(inner, t2, p1.labels[pb], t2.labels[tj])


def _one_bot(one: _LP, c_one, b: _LP, c_bot, tag) -> _LP:
    (premise,) = _premise_lps(b)
    return premise


def _forall_exists(f: _LP, cf, e: _LP, ce, tag) -> _LP:
    (f1,) = _premise_lps(f)
    (e1,) = _premise_lps(e)
    i, var = f.proof.data
    j, _, witness = e.proof.data
    instantiated = _LP(R.subst_proof(f1.proof, var, witness), f1.labels)
    return _cut(instantiated, e1, f1.labels[i], e1.labels[j])


def _weakening(prom: _LP, c_prom, w: _LP, c_w, tag) -> _LP:
    (result,) = _premise_lps(w)
    for n, formula in enumerate(prom.proof.conclusion[:-1]):
        result = _build("w", [result], (formula,), prom.labels[n])
    return result


def _absorb_contexts(result: _LP, call_labels, prom: _LP) -> _LP:
    for n, label in enumerate(prom.labels[:-1]):
        result = _build("b", [result], (_Ref(0, call_labels[n]), _Ref(0, label)), label)
    return result


def _relabelled_call(call: Proof, prom: _LP) -> Tuple[_LP, list]:
    context = [_fresh() for _ in prom.labels[:-1]]
    head = _fresh()
    return _LP(call, context + [head]), context


def _fp_absorb(prom: _LP, c_prom, b: _LP, c_b, tag) -> _LP:
    (b1,) = _premise_lps(b)
    i, j = b.proof.data
    call, context = _relabelled_call(prom.proof.premises[0], prom)
    inner = _cut(prom, b1, c_prom, b1.labels[j], tag=tag)
    outer = _cut(call, inner, call.labels[-1], b1.labels[i])
    return _absorb_contexts(outer, context, prom)


def _cp_absorb(prom: _LP, c_prom, b: _LP, c_b, tag) -> _LP:
    prom = _unfolded(prom)
    (b1,) = _premise_lps(b)
    i, j = b.proof.data
    call, context = _relabelled_call(prom.proof.premises[0], prom)
    tail = _LP(prom.proof.premises[1], prom.labels)
    inner = _cut(call, b1, call.labels[-1], b1.labels[i])
    outer = _cut(tail, inner, c_prom, b1.labels[j], tag=tag)
    return _absorb_contexts(outer, context, prom)


def _nu_absorb(prom: _LP, c_prom, b: _LP, c_b, tag) -> _LP:
    (b1,) = _premise_lps(b)
    i, j = b.proof.data
    calls, sel = prom.proof.premises, prom.proof.selector
    call, context = _relabelled_call(calls[sel.at(0)], prom)
    tail = _LP(R.nu(calls, sel.shift(1)), prom.labels)
    inner = _cut(tail, b1, c_prom, b1.labels[j], tag=tag)
    outer = _cut(call, inner, call.labels[-1], b1.labels[i])
    return _absorb_contexts(outer, context, prom)


def _call_cut(left_call: Proof, prom: _LP, right_call: Proof, other: _LP, c_other, head_label) -> _LP:
    """cut of a call of prom against a call of other, arranged with the head formula last."""
    a = _LP(left_call, prom.labels[:-1] + [_fresh()])
    b = _LP(right_call, other.labels[:-1] + [head_label])
    joined = _cut(a, b, a.labels[-1], c_other)
    target = [l for l in joined.labels if l != head_label] + [head_label]
    return joined.arranged(target)


def _fp_fp(prom: _LP, c_prom, other: _LP, c_other, tag) -> _LP:
    head = _fresh()
    inner = _call_cut(prom.proof.premises[0], prom, other.proof.premises[0], other, c_other, head)
    return _build("fp", [inner], (), other.labels[-1])


def _fused_calls(prom: _LP, other: _LP, c_other):
    fused, pairs = fuse(prom.proof.selector, other.proof.selector)
    head = _fresh()
    calls = [_call_cut(prom.proof.premises[x], prom, other.proof.premises[y], other, c_other, head)
             for x, y in pairs]
    return fused, calls


def _nu_nu(prom: _LP, c_prom, other: _LP, c_other, tag) -> _LP:
    fused, calls = _fused_calls(prom, other, c_other)
    return _build("nu", calls, (fused,), other.labels[-1])


def _as_nu(lp: _LP) -> _LP:
    """An fp promotion as the nu with its premise as the only call."""
    if lp.proof.rule != "fp":
        return lp
    return _LP(R.nu(lp.proof.premises, Selector.constant(1)), lp.labels)


def _mixed_nu(prom: _LP, c_prom, other: _LP, c_other, tag) -> _LP:
    return _nu_nu(_as_nu(prom), c_prom, _as_nu(other), c_other, tag)


def _cp_cp(prom: _LP, c_prom, other: _LP, c_other, tag) -> _LP:
    if prom.proof.rule == "box" and other.proof.rule == "box":
        fused, calls = _fused_calls(prom, other, c_other)
        return _build("box", calls, (fused,), other.labels[-1])
    prom, other = _unfolded(prom), _unfolded(other)
    right = _cut(_LP(prom.proof.premises[1], prom.labels), _LP(other.proof.premises[1], other.labels),
                 c_prom, c_other, tag=tag)
    head = _fresh()
    left = _call_cut(prom.proof.premises[0], prom, other.proof.premises[0], other, c_other, head)
    target = right.labels[:-1] + [head]
    left = left.arranged(target)
    proof = R.cp(left.proof, right.proof)
    return _LP(proof, right.labels)


_PROMOTION_STEPS = {
    ("fp", "w"): _weakening, ("nu", "w"): _weakening, ("cp", "w"): _weakening,
    ("fp", "b"): _fp_absorb, ("nu", "b"): _nu_absorb, ("cp", "b"): _cp_absorb,
    ("fp", "fp"): _fp_fp, ("nu", "nu"): _nu_nu, ("cp", "cp"): _cp_cp,
}


# ---------------------------------------------------------------------------
# Commutative steps
# ---------------------------------------------------------------------------

def _data_refs(node: Proof, premises: List[_LP]) -> tuple:
    rule, data = node.rule, node.data
    if rule in ("par", "b"):
        return (_Ref(0, premises[0].labels[data[0]]), _Ref(0, premises[0].labels[data[1]]))
    if rule in ("forall", "exists"):
        return (_Ref(0, premises[0].labels[data[0]]),) + tuple(data[1:])
    if rule in ("tensor", "cut"):
        return (_Ref(0, premises[0].labels[data[0]]), _Ref(1, premises[1].labels[data[1]]))
    return data


def _commute(side: _LP, c_side, other: _LP, c_other, tag) -> _LP:
    """Move the cut above the rule concluding side, into the premise holding the cut formula."""
    node = side.proof
    if node.rule == "forall" and node.data[1] in set().union(*(free_vars(f) for f in other.proof.conclusion)):
        avoid = set().union(*(free_vars(f) for f in other.proof.conclusion))
        side = _LP(R.rename_eigenvariables(node, avoid), side.labels)
        node = side.proof
    premises = _premise_lps(side)
    data = _data_refs(node, premises)
    (k,) = [n for n, lp in enumerate(premises) if c_side in lp.labels]
    premises[k] = _cut(premises[k], other, c_side, c_other, tag=tag)
    principal = R.principal_positions(node.rule, len(node.conclusion))
    principal_label = side.labels[principal[0]] if principal else None
    return _build(node.rule, premises, data, principal_label, tag=node.tag)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass
class _Plan:
    kind: str
    run: Callable[[], _LP]
    bordered: bool = False
    through_cut: bool = False


def _is_principal(lp: _LP, label) -> bool:
    return lp.at(label) in R.principal_positions(lp.proof.rule, len(lp.labels))


def _plan(node: Proof, allow_cut_commutation: bool = False) -> Tuple[Optional[_Plan], list]:
    """How the cut node reduces, and the labels of its conclusion."""
    if node.rule != "cut":
        raise StepError(f"rule at the redex is {node.rule}, not cut")
    p, q = node.premises
    i, j = node.data
    ca, cb = ("cut", 0), ("cut", 1)
    a = _LP(p, [ca if k == i else ("p", k) for k in range(len(p.conclusion))])
    b = _LP(q, [cb if k == j else ("q", k) for k in range(len(q.conclusion))])
    target = [l for l in a.labels if l != ca] + [l for l in b.labels if l != cb]
    a, b = _peel(a), _peel(b)
    tag = node.tag

    ra, rb = a.proof.rule, b.proof.rule
    pa, pb = _is_principal(a, ca), _is_principal(b, cb)
    # bordered: the active !-formula is principal for a promotion of an nwb
    bordered = (ra in ("cp", "box") and pa) or (rb in ("cp", "box") and pb)

    def plan(kind, fn, x, cx, y, cy, through_cut=False):
        return _Plan(kind, lambda: fn(x, cx, y, cy, tag), bordered, through_cut)

    if ra == "ax":
        return plan("mult-ax", _mult_ax, a, ca, b, cb), target
    if rb == "ax":
        return plan("mult-ax", _mult_ax, b, cb, a, ca), target
    if pa and pb:
        pair = {ra: (a, ca), rb: (b, cb)}
        if set(pair) == {"tensor", "par"}:
            return plan("mult-tensor-par", _tensor_par, *pair["tensor"], *pair["par"]), target
        if set(pair) == {"one", "bot"}:
            return plan("mult-one-bot", _one_bot, *pair["one"], *pair["bot"]), target
        if set(pair) == {"forall", "exists"}:
            return plan("so-forall-exists", _forall_exists, *pair["forall"], *pair["exists"]), target
    for (x, cx, px), (y, cy, py) in (((a, ca, pa), (b, cb, pb)), ((b, cb, pb), (a, ca, pa))):
        family = _FAMILY.get(x.proof.rule)
        if family is None or not px:
            continue
        other = y.proof.rule
        if py and other in ("w", "b"):
            kind = f"{family}-{other}"
        elif not py and other in _FAMILY:
            if {family, _FAMILY[other]} == {"fp", "nu"}:
                return plan("nu-nu", _mixed_nu, x, cx, y, cy), target
            if _FAMILY[other] != family:
                raise StepError(f"cut between a {x.proof.rule} and a {other} promotion")
            kind = f"{family}-{family}"
        else:
            continue
        return plan(kind, _PROMOTION_STEPS[(family, kind.split("-")[1])], x, cx, y, cy), target
    for (x, cx, px), (y, cy) in (((a, ca, pa), (b, cb)), ((b, cb, pb), (a, ca))):
        if px:
            continue
        rule = x.proof.rule
        if rule in _UNARY:
            return plan("comm-1", _commute, x, cx, y, cy), target
        if rule == "tensor":
            return plan("comm-2", _commute, x, cx, y, cy), target
    if allow_cut_commutation:
        for (x, cx, px), (y, cy) in (((a, ca, pa), (b, cb)), ((b, cb, pb), (a, ca))):
            if not px and x.proof.rule == "cut":
                return plan("comm-2", _commute, x, cx, y, cy, through_cut=True), target
    return None, target


def cut_kind(node: Proof, allow_cut_commutation: bool = False) -> Optional[str]:
    """Kind of the step reducing this cut, or None when the cut is blocked."""
    found, _ = _plan(node, allow_cut_commutation)
    return found.kind if found else None


def is_exponential_cut(node: Proof) -> bool:
    p = node.premises[0]
    return isinstance(p.conclusion[node.data[0]], (Bang, Quest))


def reduce_cut(node: Proof, allow_cut_commutation: bool = False) -> Tuple[Proof, str]:
    """One step at this cut; the result proves the same sequent in the same order."""
    found, target = _plan(node, allow_cut_commutation)
    if found is None:
        raise StepError(f"cut on {render(node.premises[0].conclusion[node.data[0]])} is blocked")
    result = found.run()
    proof = R.arrange(result.proof, result.labels, target)
    logger.debug(f"{found.kind}: size {node.size} -> {proof.size}")
    return proof, found.kind


# ---------------------------------------------------------------------------
# Redexes in a tree
# ---------------------------------------------------------------------------

def cut_sites(tree: Proof) -> Iterator[Tuple[Address, Proof, int]]:
    """Every cut of the finite structure with its address and nesting level."""
    stack = [((), tree, 0)]
    while stack:
        address, node, level = stack.pop()
        if node.rule == "box":
            continue
        if node.rule == "cut":
            yield address, node, level
        for k in range(len(node.premises) - 1, -1, -1):
            inner = level
            if node.rule in ("fp", "nu"):
                inner = level + 1
            elif node.rule == "cp" and k == 0:
                inner = level + 1
            stack.append((address + (k + 1,), node.premises[k], inner))


def _order_key(step: CutStep):
    return (step.height, tuple(-x for x in step.address))


def applicable_steps(tree: Proof, allow_cut_commutation: bool = False) -> List[CutStep]:
    """Reducible cuts, lowest first and rightmost first among equal heights."""
    steps = []
    for address, node, level in cut_sites(tree):
        found, _ = _plan(node, allow_cut_commutation)
        if found is None:
            continue
        steps.append(CutStep(found.kind, address, level == 0, found.bordered, node.tag, found.through_cut))
    steps.sort(key=_order_key)
    return steps


def blocked_cuts(tree: Proof) -> List[Address]:
    return [address for address, node, _ in cut_sites(tree) if _plan(node, True)[0] is None]


def apply_step(tree: Proof, step: CutStep) -> Proof:
    """Reduce the cut at step.address; the step must still describe that cut."""
    try:
        node = R.subproof(tree, step.address)
    except ValidationError as e:
        raise StepError(f"no redex at {list(step.address)}: {str(e)}") from None
    found, target = _plan(node, step.through_cut)
    if found is None or found.kind != step.kind:
        raise StepError(f"cut at {list(step.address)} is not a {step.kind} redex")
    result = found.run()
    new = R.arrange(result.proof, result.labels, target)
    if new.origin is None and node.origin is not None:
        new = Proof(new.rule, new.premises, new.data, new.conclusion, new.tag, node.origin)
    logger.debug(f"{step.kind} at {list(step.address)}")
    return R.replace(tree, step.address, new)


class CutTagger:
    """Gives every untagged cut of the finite structure a fresh tag."""

    def __init__(self, prefix: str = "c"):
        self.prefix = prefix
        self._counter = itertools.count()

    def __call__(self, tree: Proof) -> Proof:
        def go(node: Proof) -> Proof:
            if node.rule == "box" or not node.premises:
                return node
            premises = tuple(go(p) for p in node.premises)
            tag = node.tag
            if node.rule == "cut" and tag is None:
                tag = f"{self.prefix}{next(self._counter)}"
            if tag == node.tag and all(x is y for x, y in zip(premises, node.premises)):
                return node
            return Proof(node.rule, premises, node.data, node.conclusion, tag, node.origin)

        return go(tree)


def find_tag(tree: Proof, tag: str) -> Optional[Address]:
    for address, node, _ in cut_sites(tree):
        if node.tag == tag:
            return address
    return None


def cut_residue(tree: Proof, step: CutStep, cut: Address) -> Optional[Address]:
    """Address in the reduct of the residue of the exponential cut at address cut."""
    tagger = CutTagger("r")
    tree = tagger(tree)
    node = R.subproof(tree, cut)
    if node.rule != "cut" or not is_exponential_cut(node):
        raise StepError(f"the cut at {list(cut)} is not an exponential cut")
    reduct = apply_step(tree, step)
    return find_tag(reduct, node.tag)
