#!/usr/bin/env python3
"""
Translation of typing derivations into proofs.

A judgement x1:s1, ..., xn:sn |- M : t becomes a proof of
~s1', ..., ~sn', t' where ' maps types to formulas homomorphically,
s -o A to s' -o A' and w s to !s'. Streams become nu over their calls.
"""

import logging
from typing import List, Tuple

import rules as R
from proofgraph import ProofGraph, to_graph
from rules import Proof
from syntax import (
    ONE,
    Bang,
    Exists,
    Forall,
    Formula,
    Quest,
    Tensor,
    TypingError,
    Var,
    lolli,
    negate,
    substitute,
)
from type_system import (
    Arrow,
    Meta,
    TBang,
    TForall,
    TOmega,
    TTensor,
    TUnit,
    TVar,
    Type,
    TypingDerivation,
    render_type,
    validate_derivation,
)

# Set up logging
logger = logging.getLogger(__name__)

RESULT = "@result"


def translate_type(t: Type) -> Formula:
    if isinstance(t, TVar):
        return Var(t.name)
    if isinstance(t, TUnit):
        return ONE
    if isinstance(t, Arrow):
        return lolli(translate_type(t.arg), translate_type(t.res))
    if isinstance(t, TTensor):
        return Tensor(translate_type(t.left), translate_type(t.right))
    if isinstance(t, (TBang, TOmega)):
        return Bang(translate_type(t.body))
    if isinstance(t, TForall):
        return Forall(t.var, translate_type(t.body))
    if isinstance(t, Meta):
        raise TypingError(f"cannot translate unsolved type {render_type(t)}")
    raise TypeError(f"not a type: {t!r}")


def _drop(labels: List[str], *positions: int) -> List[str]:
    return [label for k, label in enumerate(labels) if k not in positions]


def _translate(d: TypingDerivation) -> Tuple[Proof, List[str]]:
    """Proof of the translated judgement, with a variable name (or RESULT) per formula."""
    rule = d.rule
    if rule == "ax":
        (x, t), = d.context
        a = translate_type(t)
        return R.ax(negate(a), a), [x, RESULT]

    if rule == "lolli-i":
        p, labels = _translate(d.premises[0])
        i, j = labels.index(d.data[0]), labels.index(RESULT)
        return R.par(p, i, j), _drop(labels, i, j) + [RESULT]

    if rule == "lolli-e":
        p, lp = _translate(d.premises[0])
        q, lq = _translate(d.premises[1])
        b = translate_type(d.type)
        rq = lq.index(RESULT)
        gadget = R.tensor(q, R.ax(negate(b), b), rq, 0)
        rp = lp.index(RESULT)
        proof = R.cut(p, gadget, rp, len(gadget.conclusion) - 1)
        return proof, _drop(lp, rp) + _drop(lq, rq) + [RESULT]

    if rule == "unit-i":
        return R.one(), [RESULT]

    if rule == "unit-e":
        p, lp = _translate(d.premises[0])
        q, lq = _translate(d.premises[1])
        rp = lp.index(RESULT)
        botted = R.bot(q)
        proof = R.cut(p, botted, rp, len(botted.conclusion) - 1)
        return proof, _drop(lp, rp) + lq

    if rule == "tensor-i":
        p, lp = _translate(d.premises[0])
        q, lq = _translate(d.premises[1])
        rp, rq = lp.index(RESULT), lq.index(RESULT)
        return R.tensor(p, q, rp, rq), _drop(lp, rp) + _drop(lq, rq) + [RESULT]

    if rule == "tensor-e":
        x, y = d.data
        p, lp = _translate(d.premises[0])
        q, lq = _translate(d.premises[1])
        ix, iy = lq.index(x), lq.index(y)
        split = R.par(q, ix, iy)
        rp = lp.index(RESULT)
        proof = R.cut(p, split, rp, len(split.conclusion) - 1)
        return proof, _drop(lp, rp) + _drop(lq, ix, iy)

    if rule == "forall-i":
        p, labels = _translate(d.premises[0])
        r = labels.index(RESULT)
        return R.forall(p, r, d.data[0]), _drop(labels, r) + [RESULT]

    if rule == "forall-e":
        p, labels = _translate(d.premises[0])
        general = translate_type(d.premises[0].type)
        witness = translate_type(d.data[0])
        instance = substitute(general.body, general.var, witness)
        gadget = R.exists(R.ax(negate(instance), instance), 0,
                          Exists(general.var, negate(general.body)), witness)
        r = labels.index(RESULT)
        return R.cut(p, gadget, r, 1), _drop(labels, r) + [RESULT]

    if rule == "fp":
        p, labels = _translate(d.premises[0])
        r = labels.index(RESULT)
        p = R.move_to_end(p, r)
        return R.fp(p), _drop(labels, r) + [RESULT]

    if rule == "w":
        x, t = d.data
        p, labels = _translate(d.premises[0])
        return R.weaken(p, negate(translate_type(t))), labels + [x]

    if rule == "b":
        x, y, z = d.data
        p, labels = _translate(d.premises[0])
        i, j = labels.index(y), labels.index(z)
        return R.absorb(p, i, j), _drop(labels, i, j) + [x]

    if rule == "stream":
        calls = []
        for premise in d.premises:
            p, labels = _translate(premise)
            calls.append(p)
        return R.nu(calls, d.term.selector), [RESULT]

    if rule == "disc":
        body = translate_type(d.type.arg.body)
        return R.par(R.weaken(R.one(), Quest(negate(body))), 1, 0), [RESULT]

    if rule == "pop":
        body = translate_type(d.type.arg.body)
        head = R.ax(negate(body), body)
        tail = R.fp(R.ax(negate(body), body))
        both = R.tensor(head, tail, 1, 1)
        return R.par(R.absorb(both, 0, 1), 1, 0), [RESULT]

    raise TypingError(f"no translation for rule {rule}")


def translate_dagger_proof(d: TypingDerivation, system: str = "nupta2") -> Proof:
    """Proof tree of ~G', t' for d concluding G |- M : t, in context order."""
    validate_derivation(d, system)
    proof, labels = _translate(d)
    target = [x for x, _ in d.context] + [RESULT]
    proof = R.arrange(proof, labels, target)
    logger.debug(f"Translated {d.size()} typing rules into a proof of size {proof.size}")
    return proof


def translate_dagger(d: TypingDerivation, system: str = "nupta2") -> ProofGraph:
    return to_graph(translate_dagger_proof(d, system), cycles=False)
