#!/usr/bin/env python3
"""
Seeded random corpus of formulas and finite (open) derivations.

Derivations are grown from η-expanded axioms by random rule templates; cuts
are introduced against partners proving the dual formula, so the corpus
exercises every cut-elimination step of the finite fragment.
"""

import logging
import random
from typing import List, Optional, Sequence, Tuple

import rules as R
from rules import Proof
from syntax import (
    BOT,
    ONE,
    Bang,
    Bot,
    DualVar,
    Exists,
    Forall,
    Formula,
    One,
    Par,
    Quest,
    Tensor,
    Var,
    all_vars,
    free_vars,
    fresh_name,
    negate,
    substitute,
)

# Set up logging
logger = logging.getLogger(__name__)

DEFAULT_FORMULA_DEPTH = 2
DEFAULT_GROW_STEPS = 8
DEFAULT_MAX_SIZE = 200
VARIABLES = ("X", "Y")


def random_formula(rng: random.Random, depth: int = DEFAULT_FORMULA_DEPTH,
                   variables: Sequence[str] = VARIABLES, exponentials: bool = True) -> Formula:
    """A formula of at most the given connective depth over the given variables."""
    if depth <= 0 or rng.random() < 0.25:
        choice = rng.randrange(6)
        if choice == 0:
            return ONE
        if choice == 1:
            return BOT
        name = rng.choice(list(variables))
        return Var(name) if choice % 2 else DualVar(name)
    kinds = ["tensor", "par", "forall", "exists"] + (["bang", "quest"] if exponentials else [])
    kind = rng.choice(kinds)
    if kind in ("tensor", "par"):
        left = random_formula(rng, depth - 1, variables, exponentials)
        right = random_formula(rng, depth - 1, variables, exponentials)
        return Tensor(left, right) if kind == "tensor" else Par(left, right)
    if kind in ("bang", "quest"):
        body = random_formula(rng, depth - 1, variables, exponentials)
        return Bang(body) if kind == "bang" else Quest(body)
    var = rng.choice(list(variables))
    body = random_formula(rng, depth - 1, variables, exponentials)
    return Forall(var, body) if kind == "forall" else Exists(var, body)


def eta_expansion(a: Formula) -> Proof:
    """Cut-free proof of ~a, a whose axioms are all on atoms."""
    if isinstance(a, (Var, DualVar)):
        return R.ax(negate(a), a)
    if isinstance(a, Bot):
        return R.bot(R.one())
    if isinstance(a, One):
        return R.ex(R.bot(R.one()), [1, 0])
    if isinstance(a, Tensor):
        both = R.tensor(eta_expansion(a.left), eta_expansion(a.right), 1, 1)
        return R.ex(R.par(both, 0, 1), [1, 0])
    if isinstance(a, Par):
        both = R.tensor(eta_expansion(negate(a.left)), eta_expansion(negate(a.right)), 1, 1)
        return R.par(both, 0, 1)
    if isinstance(a, Bang):
        return R.fp(eta_expansion(a.body))
    if isinstance(a, Quest):
        return R.ex(R.fp(eta_expansion(negate(a.body))), [1, 0])
    if isinstance(a, Forall):
        opened = R.exists(eta_expansion(a.body), 0, Exists(a.var, negate(a.body)), Var(a.var))
        return R.forall(opened, 0, a.var)
    if isinstance(a, Exists):
        opened = R.exists(eta_expansion(negate(a.body)), 0, a, Var(a.var))
        return R.ex(R.forall(opened, 0, a.var), [1, 0])
    raise TypeError(f"not a formula: {a!r}")


def _shift(keep: Optional[int], *removed: int) -> Optional[int]:
    """Position of the kept formula after the given positions are dropped."""
    if keep is None:
        return None
    return keep - sum(1 for r in removed if r < keep)


def _sequent_vars(p: Proof) -> set:
    names = set()
    for f in p.conclusion:
        names |= all_vars(f)
    return names


class Grower:
    """Applies random rule templates to a proof, optionally never touching one formula."""

    def __init__(self, rng: random.Random, formula_depth: int = DEFAULT_FORMULA_DEPTH,
                 open_leaves: bool = False, partner_steps: int = 2):
        self.rng = rng
        self.formula_depth = formula_depth
        self.open_leaves = open_leaves
        self.partner_steps = partner_steps

    def leaf(self) -> Proof:
        roll = self.rng.random()
        if self.open_leaves and roll < 0.2:
            width = self.rng.randint(1, 2)
            return R.hyp([random_formula(self.rng, self.formula_depth) for _ in range(width)])
        if roll < 0.3:
            return R.one()
        return eta_expansion(random_formula(self.rng, self.formula_depth))

    def _free(self, p: Proof, keep: Optional[int]) -> List[int]:
        return [i for i in range(len(p.conclusion)) if i != keep]

    def step(self, p: Proof, keep: Optional[int] = None, depth: int = 0) -> Tuple[Proof, Optional[int]]:
        """One random rule application; returns the proof and the kept formula's new position."""
        rng = self.rng
        free = self._free(p, keep)
        width = len(p.conclusion)
        options = ["bot", "weaken", "ex"]
        if free:
            options += ["tensor", "absorb", "exists", "forall", "cut", "cut"]
        if len(free) >= 2:
            options.append("par")
        if keep is None and width:
            options.append("fp")
        kind = rng.choice(options)

        if kind == "bot":
            return R.bot(p), keep
        if kind == "weaken":
            return R.weaken(p, Quest(random_formula(rng, self.formula_depth))), keep
        if kind == "ex":
            perm = list(range(width))
            rng.shuffle(perm)
            return R.ex(p, perm), (perm.index(keep) if keep is not None else None)
        if kind == "par":
            i, j = rng.sample(free, 2)
            return R.par(p, i, j), _shift(keep, i, j)
        if kind == "tensor":
            i = rng.choice(free)
            other = self.leaf()
            j = rng.randrange(len(other.conclusion))
            return R.tensor(p, other, i, j), _shift(keep, i)
        if kind == "fp":
            i = rng.randrange(width)
            return R.fp(R.move_to_end(p, i)), None

        i = rng.choice(free)
        a = p.conclusion[i]
        if kind == "absorb":
            return R.absorb(R.weaken(p, Quest(a)), i, width), _shift(keep, i)
        if kind == "exists":
            names = sorted(free_vars(a))
            if not names:
                return R.exists(p, i, Exists(fresh_name("Z", _sequent_vars(p)), a), Var(VARIABLES[0])), _shift(keep, i)
            target = rng.choice(names)
            bound = fresh_name("Z", _sequent_vars(p))
            return R.exists(p, i, Exists(bound, substitute(a, target, Var(bound))), Var(target)), _shift(keep, i)
        if kind == "forall":
            others = set()
            for k, f in enumerate(p.conclusion):
                if k != i:
                    others |= free_vars(f)
            candidates = sorted(free_vars(a) - others)
            var = rng.choice(candidates) if candidates else fresh_name("V", _sequent_vars(p))
            return R.forall(p, i, var), _shift(keep, i)
        # cut against a partner proving the dual of a
        partner, j = self.partner(negate(a), depth)
        return R.cut(p, partner, i, j), _shift(keep, i)

    def partner(self, a: Formula, depth: int = 0) -> Tuple[Proof, int]:
        """A proof with a at a known position, grown around it."""
        proof, keep = eta_expansion(a), 1
        if depth < 1:
            for _ in range(self.rng.randint(0, self.partner_steps)):
                proof, keep = self.step(proof, keep, depth + 1)
        return proof, keep


def random_derivation(rng: random.Random, steps: int = DEFAULT_GROW_STEPS,
                      formula_depth: int = DEFAULT_FORMULA_DEPTH, open_leaves: bool = False,
                      max_size: int = DEFAULT_MAX_SIZE) -> Proof:
    """A valid finite derivation, open when open_leaves allows hyp leaves."""
    grower = Grower(rng, formula_depth, open_leaves)
    proof = grower.leaf()
    for _ in range(steps):
        grown, _ = grower.step(proof)
        if grown.size > max_size:
            break
        proof = grown
    return proof


def random_cut(rng: random.Random, formula_depth: int = DEFAULT_FORMULA_DEPTH,
               grow_steps: int = 2) -> Proof:
    """A cut between two cut-free derivations of dual formulas."""
    a = random_formula(rng, formula_depth)
    grower = Grower(rng, formula_depth, partner_steps=0)
    left, i = eta_expansion(a), 1
    right, j = eta_expansion(negate(a)), 1
    for _ in range(rng.randint(0, grow_steps)):
        side = rng.random() < 0.5
        if side:
            left, i = _grow_cut_free(grower, left, i)
        else:
            right, j = _grow_cut_free(grower, right, j)
    return R.cut(left, right, i, j)


def _grow_cut_free(grower: Grower, proof: Proof, keep: int) -> Tuple[Proof, int]:
    for _ in range(8):
        grown, moved = grower.step(proof, keep, depth=1)
        if R.is_cut_free(grown):
            return grown, moved
    return proof, keep


def generate_corpus(seed: int, count: int, steps: int = DEFAULT_GROW_STEPS,
                    formula_depth: int = DEFAULT_FORMULA_DEPTH, open_leaves: bool = True,
                    max_size: int = DEFAULT_MAX_SIZE) -> List[Proof]:
    """count derivations, deterministic in seed; every third one is a bare cut instance."""
    rng = random.Random(seed)
    corpus = []
    for k in range(count):
        if k % 3 == 2:
            corpus.append(random_cut(rng, formula_depth))
        else:
            corpus.append(random_derivation(rng, steps, formula_depth, open_leaves, max_size))
    cuts = sum(R.count_rules(p, {"cut"}) for p in corpus)
    logger.info(f"Generated {len(corpus)} derivations with {cuts} cuts (seed {seed})")
    return corpus
