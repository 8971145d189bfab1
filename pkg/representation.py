#!/usr/bin/env python3
"""
Data as derivations.

Booleans, strings and Church numerals are encoded as cut-free PLL2
derivations of B, S and N; a derivation of In1 -o ... -o Inn -o Out is
applied to encoded inputs by stacking cuts, and cut-free results are read
back by tracing axiom links.

    B    = all X. (~X | ~X) | X * X
    S[A] = ?(B * (A * ~A)) | (~A | A)      (= !(B -o A -o A) -o A -o A)
    N[A] = ?(A * ~A) | (~A | A)            (= !(A -o A) -o A -o A)

The string b1...bn is the iterator f bn (... (f b1 z)): the call whose result
feeds the output carries the last character.
"""

from __future__ import annotations

import itertools
import logging
from typing import List, Optional, Sequence, Union

import rules as R
from rules import Proof
from syntax import (
    Bang,
    Bot,
    DecodeError,
    DualVar,
    Exists,
    Forall,
    Formula,
    One,
    Par,
    PreconditionError,
    Quest,
    Tensor,
    Var,
    alpha_eq,
    negate,
    parse_formula,
    render,
    substitute,
)

# Set up logging
logger = logging.getLogger(__name__)

X = Var("X")
B = parse_formula("all X. (~X | ~X) | X * X")


def string_body(a: Formula) -> Formula:
    return Par(Quest(Tensor(B, Tensor(a, negate(a)))), Par(negate(a), a))


def nat_body(a: Formula) -> Formula:
    return Par(Quest(Tensor(a, negate(a))), Par(negate(a), a))


S = Forall("X", string_body(X))
N = Forall("X", nat_body(X))


# ---------------------------------------------------------------------------
# Encoders
# ---------------------------------------------------------------------------

def bool_proof(bit: Union[int, str]) -> Proof:
    """The derivation of B linking the first input to the left output for 1, crossed for 0."""
    core = R.tensor(R.ax(DualVar("X"), X), R.ax(DualVar("X"), X), 1, 1)
    first = R.par(core, 0, 1) if int(bit) else R.par(core, 1, 0)
    return R.forall(R.par(first, 1, 0), 0, "X")


def _iterator_core(length_or_bits, a: Formula, with_bits: bool) -> Proof:
    """Derivation of ?I, ~A, A where each element becomes one absorbed call instance."""
    if with_bits:
        instance = Tensor(B, Tensor(a, negate(a)))
    else:
        instance = Tensor(a, negate(a))
    proof = R.ex(R.weaken(R.ax(negate(a), a), Quest(instance)), [2, 0, 1])
    for element in length_or_bits:
        inner = R.tensor(proof, R.ax(negate(a), a), 2, 0)
        if with_bits:
            step = R.tensor(bool_proof(element), inner, 0, 3)
        else:
            step = inner
        proof = R.ex(R.absorb(step, 3, 0), [2, 0, 1])
    return proof


def _close(core: Proof) -> Proof:
    return R.par(R.par(core, 1, 2), 0, 1)


def string_proof_at(s: str, a: Formula) -> Proof:
    if any(ch not in "01" for ch in s):
        raise PreconditionError(f"not a binary string: {s!r}")
    return _close(_iterator_core(s, a, True))


def string_proof(s: str) -> Proof:
    return R.forall(string_proof_at(s, X), 0, "X")


def nat_proof_at(n: int, a: Formula) -> Proof:
    if n < 0:
        raise PreconditionError(f"not a natural number: {n}")
    return _close(_iterator_core(range(n), a, False))


def nat_proof(n: int) -> Proof:
    return R.forall(nat_proof_at(n, X), 0, "X")


def not_proof() -> Proof:
    """Derivation of B -o B exchanging the two inputs."""
    y, ny = Var("Y"), DualVar("Y")
    outputs = R.par(R.tensor(R.ax(ny, y), R.ax(ny, y), 1, 1), 0, 1)   # Y*Y, ~Y|~Y
    inputs = R.par(R.tensor(R.ax(y, ny), R.ax(y, ny), 0, 0), 1, 0)    # Y*Y, ~Y|~Y crossed
    joined = R.par(R.tensor(inputs, outputs, 0, 1), 0, 1)
    instantiated = R.exists(joined, 0, negate(B), y)
    return R.par(R.forall(instantiated, 0, "Y"), 0, 1)


def identity_proof(a: Formula) -> Proof:
    return R.par(R.ax(negate(a), a), 0, 1)


def _string_argument(f: Formula) -> Optional[Formula]:
    """A when f is S[A], None otherwise."""
    if not isinstance(f, Par) or not isinstance(f.left, Quest) or not isinstance(f.right, Par):
        return None
    body = f.left.body
    if not isinstance(body, Tensor) or not isinstance(body.right, Tensor) or not alpha_eq(body.left, B):
        return None
    a = body.right.left
    return a if alpha_eq(f, string_body(a)) else None


def _nat_argument(f: Formula) -> Optional[Formula]:
    if not isinstance(f, Par) or not isinstance(f.left, Quest) or not isinstance(f.left.body, Tensor):
        return None
    a = f.left.body.left
    return a if alpha_eq(f, nat_body(a)) else None


def encode_for(value, formula: Formula) -> Proof:
    """Derivation of formula encoding value, chosen by the shape of formula."""
    if alpha_eq(formula, B):
        return bool_proof(value)
    if isinstance(formula, Forall):
        body = substitute(formula.body, formula.var, X) if formula.var != "X" else formula.body
        if isinstance(value, str) and _string_argument(body) is not None:
            return string_proof(value)
        if isinstance(value, int) and _nat_argument(body) is not None:
            return nat_proof(value)
    if isinstance(value, str):
        a = _string_argument(formula)
        if a is not None:
            return string_proof_at(value, a)
    if isinstance(value, int) and not isinstance(value, bool):
        a = _nat_argument(formula)
        if a is not None:
            return nat_proof_at(value, a)
    raise PreconditionError(f"cannot encode {value!r} as {render(formula)}")


def apply_inputs(d: Proof, values: Sequence) -> Proof:
    """Cut encoded inputs against d.

    A one-formula conclusion In1 -o ... -o Out is consumed with the gadget
    cut(d ; tensor(input, ax(~Rest, Rest))); a longer conclusion ~In1, ..., ~Inn, Out
    is cut position by position from the left.
    """
    proof = d
    if len(d.conclusion) == 1:
        for value in values:
            f = proof.conclusion[-1]
            if not isinstance(f, Par):
                raise PreconditionError(f"{render(f)} takes no further input")
            rest = f.right
            x = encode_for(value, negate(f.left))
            gadget = R.tensor(x, R.ax(negate(rest), rest), 0, 0)
            proof = R.cut(proof, gadget, len(proof.conclusion) - 1, 1)
        return proof
    if len(values) != len(d.conclusion) - 1:
        raise PreconditionError(f"expected {len(d.conclusion) - 1} inputs, got {len(values)}")
    for value in values:
        x = encode_for(value, negate(proof.conclusion[0]))
        proof = R.cut(x, proof, 0, 0)
    return proof


# ---------------------------------------------------------------------------
# Decoders
# ---------------------------------------------------------------------------
#
# A linked formula mirrors a conclusion formula with atoms replaced by the id
# of the axiom they come from: ("atom", id), ("one",), ("bot",),
# ("tensor", l, r), ("par", l, r), ("quest", bodies), ("bang", bodies).
# Quantifiers are transparent; absorption collects bodies into one ?-node.

def _linked_formula(f: Formula, fresh) -> tuple:
    if isinstance(f, (Var, DualVar)):
        return ("atom", next(fresh))
    if isinstance(f, One):
        return ("one",)
    if isinstance(f, Bot):
        return ("bot",)
    if isinstance(f, (Tensor, Par)):
        tag = "tensor" if isinstance(f, Tensor) else "par"
        return (tag, _linked_formula(f.left, fresh), _linked_formula(f.right, fresh))
    if isinstance(f, (Quest, Bang)):
        tag = "quest" if isinstance(f, Quest) else "bang"
        return (tag, (_linked_formula(f.body, fresh),))
    if isinstance(f, (Forall, Exists)):
        return _linked_formula(f.body, fresh)
    raise TypeError(f"not a formula: {f!r}")


_DUAL_TAGS = {"tensor": "par", "par": "tensor", "one": "bot", "bot": "one", "quest": "bang", "bang": "quest"}


def _dual_linked(lf: tuple) -> tuple:
    tag = lf[0]
    if tag == "atom":
        return lf
    if tag in ("one", "bot"):
        return (_DUAL_TAGS[tag],)
    if tag in ("tensor", "par"):
        return (_DUAL_TAGS[tag], _dual_linked(lf[1]), _dual_linked(lf[2]))
    return (_DUAL_TAGS[tag], tuple(_dual_linked(b) for b in lf[1]))


def linked_conclusion(proof: Proof) -> List[tuple]:
    """Linked formulas of the conclusion of a cut-free, promotion-free derivation."""
    fresh = itertools.count()

    def go(node: Proof) -> List[tuple]:
        rule = node.rule
        if rule == "ax":
            lf = _linked_formula(node.data[0], fresh)
            return [lf, _dual_linked(lf)]
        if rule == "one":
            return [("one",)]
        if rule in ("cut", "hyp") or rule in R.PROMOTIONS:
            raise DecodeError(f"cannot read back a derivation containing {rule}")
        premises = [go(p) for p in node.premises]
        if rule == "tensor":
            (p, q), (i, j) = premises, node.data
            return list(R.drop(p, i)) + list(R.drop(q, j)) + [("tensor", p[i], q[j])]
        p = premises[0]
        if rule == "par":
            i, j = node.data
            return list(R.drop(p, i, j)) + [("par", p[i], p[j])]
        if rule == "bot":
            return p + [("bot",)]
        if rule == "w":
            return p + [("quest", ())]
        if rule == "b":
            i, j = node.data
            return list(R.drop(p, i, j)) + [("quest", (p[i],) + p[j][1])]
        if rule in ("forall", "exists"):
            i = node.data[0]
            return list(R.drop(p, i)) + [p[i]]
        if rule == "ex":
            return [p[k] for k in node.data[0]]
        raise DecodeError(f"unexpected rule {rule}")

    return go(proof)


def _ids(lf: tuple) -> frozenset:
    tag = lf[0]
    if tag == "atom":
        return frozenset([lf[1]])
    if tag in ("tensor", "par"):
        return _ids(lf[1]) | _ids(lf[2])
    if tag in ("quest", "bang"):
        return frozenset().union(*(_ids(b) for b in lf[1]))
    return frozenset()


def _bit_of(lf: tuple) -> int:
    try:
        tag, inputs, outputs = lf
        if tag != "par" or inputs[0] != "par" or outputs[0] != "tensor":
            raise ValueError
        x, y = _ids(inputs[1]), _ids(inputs[2])
        left, right = _ids(outputs[1]), _ids(outputs[2])
    except (ValueError, TypeError, IndexError):
        raise DecodeError("not the shape of a boolean") from None
    if x == left and y == right:
        return 1
    if x == right and y == left:
        return 0
    raise DecodeError("boolean links are neither straight nor crossed")


def _single(proof: Proof) -> tuple:
    if len(proof.conclusion) != 1:
        raise DecodeError(f"expected a single conclusion, got {len(proof.conclusion)}")
    return linked_conclusion(proof)[0]


def decode_bool(proof: Proof) -> int:
    return _bit_of(_single(proof))


def _follow_chain(lf: tuple, with_bits: bool) -> List[int]:
    try:
        tag, calls, ends = lf
        if tag != "par" or calls[0] != "quest" or ends[0] != "par":
            raise ValueError
        start, target = _ids(ends[1]), _ids(ends[2])
    except (ValueError, TypeError, IndexError):
        raise DecodeError("not the shape of an iterator") from None
    instances = list(calls[1])
    used = set()
    bits = []
    current = target
    while current != start:
        for k, instance in enumerate(instances):
            if k in used:
                continue
            pair = instance[2] if with_bits else instance
            if pair[0] == "tensor" and _ids(pair[2]) == current:
                used.add(k)
                if with_bits:
                    bits.append(_bit_of(instance[1]))
                else:
                    bits.append(1)
                current = _ids(pair[1])
                break
        else:
            raise DecodeError("iterator chain is broken")
    if len(used) != len(instances):
        raise DecodeError(f"{len(instances) - len(used)} calls are not on the iterator chain")
    bits.reverse()
    return bits


def decode_string(proof: Proof) -> str:
    return "".join(str(b) for b in _follow_chain(_single(proof), True))


def decode_nat(proof: Proof) -> int:
    return len(_follow_chain(_single(proof), False))


def decode_value(proof: Proof, kind: Optional[str] = None):
    """Read back a cut-free result; kind is bool, string or nat, inferred from the conclusion when omitted."""
    if kind is None:
        f = proof.conclusion[-1] if proof.conclusion else None
        if f is not None and alpha_eq(f, B):
            kind = "bool"
        elif f is not None and isinstance(f, Forall) and _nat_argument(f.body) is not None:
            kind = "nat"
        else:
            kind = "string"
    logger.debug(f"Decoding a {kind} from a derivation of size {proof.size}")
    if kind == "bool":
        return decode_bool(proof)
    if kind == "nat":
        return decode_nat(proof)
    if kind == "string":
        return decode_string(proof)
    raise DecodeError(f"unknown value kind {kind!r}")
