#!/usr/bin/env python3
"""
Cut-elimination drivers.

normalize_finite reduces finite open derivations exhaustively,
shallow_normalize runs the round-based shallow strategy on weakly regular
coderivations with a !-free conclusion, and eval_representation applies a
derivation to encoded inputs and reads the result back.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import rules as R
from criteria import base_of, boxed_tree, hypertruncate_tree, require_measurable, tree_depth
from cutelim import CutStep, CutTagger, apply_step, applicable_steps, blocked_cuts, cut_sites
from expgraph import tree_rank
from proofgraph import FINITE, NU, OPEN, ProofGraph, expand_fp, expand_nu, same_unfolding, to_graph, to_tree
from representation import apply_inputs, decode_value
from rules import Address, Proof
from syntax import Bang, PreconditionError, StepLimitExceeded, render, subformulas

# Set up logging
logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10**6
STRATEGIES = ("exhaustive", "shallow", "lazy")
SYSTEMS = ("pll2", "nupll2", "rpll", "wrpll")
POSTPONED = {"fp-fp", "nu-nu"}


@dataclass
class TraceStep:
    kind: str
    address: Address
    size: int
    c: int
    s: int
    m: int
    round: Optional[int] = None
    phase: Optional[int] = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "address": list(self.address), "size": self.size,
                "C": self.c, "S": self.s, "M": self.m, "round": self.round, "phase": self.phase}


@dataclass
class RoundRecord:
    index: int
    depth_before: int
    depth_after: int
    phase1_steps: int
    phase2_steps: int
    rank: Optional[int] = None
    cross_check: Optional[bool] = None

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Trace:
    strategy: str
    conclusion: List[str]
    initial: Dict[str, int]
    steps: List[TraceStep] = field(default_factory=list)
    rounds: List[RoundRecord] = field(default_factory=list)
    blocked: List[Address] = field(default_factory=list)
    snapshots: Dict[str, List[Proof]] = field(default_factory=lambda: {"phase1": [], "round": []})

    @property
    def cubic_bound(self) -> int:
        """2 (S C + M)^3 over the weights of the input."""
        w = self.initial
        return 2 * (w["S"] * w["C"] + w["M"]) ** 3

    @property
    def linear_bound(self) -> int:
        """Bound for sequences of principal steps only: (S + 1) |D|."""
        return (self.initial["S"] + 1) * self.initial["size"]

    @property
    def principal_only(self) -> bool:
        return all(not s.kind.startswith("comm") for s in self.steps)

    def record(self, tree: Proof, step: CutStep, round_index=None, phase=None):
        w = R.weights(tree)
        self.steps.append(TraceStep(step.kind, step.address, tree.size, w["C"], w["S"], w["M"], round_index, phase))

    def kinds(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for s in self.steps:
            counts[s.kind] = counts.get(s.kind, 0) + 1
        return counts

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "conclusion": self.conclusion,
            "steps": len(self.steps),
            "kinds": self.kinds(),
            "initial": self.initial,
            "cubic_bound": self.cubic_bound,
            "linear_bound": self.linear_bound,
            "rounds": [r.to_json() for r in self.rounds],
            "blocked": [list(a) for a in self.blocked],
        }

    def to_jsonl(self) -> str:
        """One JSON object per step."""
        return "".join(json.dumps(s.to_json()) + "\n" for s in self.steps)


def _new_trace(strategy: str, tree: Proof) -> Trace:
    initial = dict(R.weights(tree))
    initial["size"] = tree.size
    return Trace(strategy, [render(f) for f in tree.conclusion], initial)


def _finite_tree(source: Union[Proof, ProofGraph]) -> Proof:
    if isinstance(source, ProofGraph):
        if source.kind not in (FINITE, OPEN, NU):
            raise PreconditionError(f"exhaustive normalization needs a finite derivation, got a {source.kind}")
        source = to_tree(source)
    if R.has_boxes(source):
        raise PreconditionError("exhaustive normalization needs a derivation without nwbs")
    return source


def _commutation_over_cut(tree: Proof, accept: Callable[[CutStep, CutStep], bool]) -> Optional[CutStep]:
    """A commutation over a cut after which accept(commutation, step) holds for some step."""
    for step in applicable_steps(tree, allow_cut_commutation=True):
        if not step.through_cut:
            continue
        candidate = apply_step(tree, step)
        if any(accept(step, s) for s in applicable_steps(candidate)):
            return step
    return None


def normalize_finite(source: Union[Proof, ProofGraph], max_steps: int = DEFAULT_MAX_STEPS,
                     policy: str = "rightmost", seed: Optional[int] = None,
                     postpone_promotions: bool = False) -> Tuple[Proof, Trace]:
    """Reduce every reducible cut.

    policy "rightmost" always picks the rightmost cut of smallest height;
    "random" picks uniformly with a seeded generator. With
    postpone_promotions, fp-fp and nu-nu never fire: when only they are
    left, a commutation over a cut is used to expose another redex, and if
    there is none the remaining cuts are reported as blocked.
    """
    tree = _finite_tree(source)
    trace = _new_trace("exhaustive", tree)
    rng = np.random.default_rng(seed)
    while True:
        steps = applicable_steps(tree)
        if postpone_promotions:
            steps = [s for s in steps if s.kind not in POSTPONED]
            if not steps:
                unblock = _commutation_over_cut(tree, lambda c, s: s.kind not in POSTPONED)
                steps = [unblock] if unblock is not None else []
        if not steps:
            break
        if len(trace.steps) >= max_steps:
            raise StepLimitExceeded(f"normalization did not finish within {max_steps} steps", len(trace.steps))
        step = steps[int(rng.integers(len(steps)))] if policy == "random" else steps[0]
        tree = apply_step(tree, step)
        trace.record(tree, step)
    trace.blocked = blocked_cuts(tree)
    if postpone_promotions:
        trace.blocked += [s.address for s in applicable_steps(tree) if s.kind in POSTPONED]
    if trace.blocked:
        logger.info(f"{len(trace.blocked)} cuts are left blocked")
    if len(trace.steps) > trace.cubic_bound:
        logger.warning(f"{len(trace.steps)} steps exceed the cubic bound {trace.cubic_bound}")
    logger.debug(f"Normalized in {len(trace.steps)} steps to size {tree.size}")
    return tree, trace


def _has_bang(formulas) -> bool:
    return any(isinstance(sub, Bang) for f in formulas for sub in subformulas(f))


def _phase1(tree: Proof, trace: Trace, budget: int, round_index: int) -> Tuple[Proof, int]:
    count = 0
    while True:
        steps = [s for s in applicable_steps(tree) if s.shallow and not s.bordered]
        if not steps:
            return tree, count
        if len(trace.steps) >= budget:
            raise StepLimitExceeded(f"shallow normalization did not finish within {budget} steps", len(trace.steps))
        tree = apply_step(tree, steps[0])
        trace.record(tree, steps[0], round_index, 1)
        count += 1


def _phase2(tree: Proof, trace: Trace, budget: int, round_index: int, tagger: CutTagger) -> Tuple[Proof, int]:
    """Reduce the residues of the shallow bordered cuts, except cp-cp."""
    tree = tagger(tree)
    work = {s.tag for s in applicable_steps(tree, allow_cut_commutation=True) if s.shallow and s.bordered}
    count = 0
    while work:
        steps = [s for s in applicable_steps(tree, allow_cut_commutation=True)
                 if s.tag in work and s.kind != "cp-cp"]
        if not steps:
            break
        if len(trace.steps) >= budget:
            raise StepLimitExceeded(f"shallow normalization did not finish within {budget} steps", len(trace.steps))
        tree = apply_step(tree, steps[0])
        trace.record(tree, steps[0], round_index, 2)
        count += 1
    return tree, count


def _without_promotion_tails(tree: Proof) -> Proof:
    """Every cp chain that ends in a hypothesis replaced by that hypothesis."""
    memo: Dict[Proof, Proof] = {}

    def go(n: Proof) -> Proof:
        if n in memo:
            return memo[n]
        tail = n
        while tail.rule == "cp":
            tail = tail.premises[1]
        if n.rule == "cp" and tail.rule == "hyp":
            result = R.hyp(n.conclusion)
        elif not n.premises:
            result = n
        else:
            result = R.rebuild(n, [go(p) for p in n.premises])
        memo[n] = result
        return result

    return go(tree)


def _truncation_agrees(d_e: Proof, d_round: Proof, rank: int, tagger: CutTagger) -> bool:
    """base(D_round) equals Phase 2 replayed on the rank-hypertruncation of D_e.

    Both sides are compared with their unfinished promotions cut back to
    hypotheses.
    """
    scratch = Trace("cross-check", [], {"S": 0, "C": 0, "M": 0, "size": 0})
    truncated = hypertruncate_tree(d_e, rank + 1)
    replayed, _ = _phase2(truncated, scratch, DEFAULT_MAX_STEPS, 0, tagger)
    expected = to_graph(_without_promotion_tails(base_of(d_round)), cycles=False)
    return same_unfolding(expected, to_graph(_without_promotion_tails(replayed), cycles=False))


def shallow_normalize(source: Union[Proof, ProofGraph], max_steps: int = DEFAULT_MAX_STEPS,
                      cross_check: bool = False, keep_snapshots: bool = False) -> Tuple[Proof, Trace]:
    """Rounds of Phase 1 and Phase 2 until the derivation is cut-free."""
    if isinstance(source, ProofGraph):
        require_measurable(source)
        tree = boxed_tree(source)
    else:
        tree = source
    if _has_bang(tree.conclusion):
        raise PreconditionError(f"conclusion {render(list(tree.conclusion))} contains !")
    trace = _new_trace("shallow", tree)
    tagger = CutTagger()
    depth = tree_depth(tree)
    logger.info(f"Shallow strategy on a derivation of depth {depth} and size {tree.size}")
    index = 0
    while index <= depth or not R.is_cut_free(tree):
        depth_before = tree_depth(tree)
        tree, phase1 = _phase1(tree, trace, max_steps, index)
        d_e = tree
        tree, phase2 = _phase2(tree, trace, max_steps, index, tagger)
        record = RoundRecord(index, depth_before, tree_depth(tree), phase1, phase2)
        if cross_check:
            record.rank = tree_rank(d_e)
            record.cross_check = _truncation_agrees(d_e, tree, record.rank, tagger)
            if not record.cross_check:
                logger.warning(f"Round {index}: truncated replay disagrees with the base of the round result")
        if keep_snapshots:
            trace.snapshots["phase1"].append(d_e)
            trace.snapshots["round"].append(tree)
        trace.rounds.append(record)
        logger.info(f"Round {index}: {phase1} + {phase2} steps, depth {depth_before} -> {record.depth_after}")
        index += 1
        if phase1 == 0 and phase2 == 0 and index > depth:
            break
    trace.blocked = [a for a, _, _ in cut_sites(tree)]
    if trace.blocked:
        logger.warning(f"Shallow strategy stopped with {len(trace.blocked)} cuts left")
    return R.strip_tags(tree), trace


def _system_tree(source: Union[Proof, ProofGraph], system: str) -> Proof:
    if system not in SYSTEMS:
        raise PreconditionError(f"unknown system {system!r}")
    if system in ("pll2", "nupll2"):
        return _finite_tree(source)
    g = source if isinstance(source, ProofGraph) else to_graph(source, cycles=True)
    used = {app.rule for app in g.vertices.values()}
    if "nu" in used:
        g = expand_nu(g)
    elif "fp" in used:
        g = expand_fp(g)
    return boxed_tree(g)


def eval_representation(source: Union[Proof, ProofGraph], inputs: Sequence, system: str = "pll2",
                        kind: Optional[str] = None, max_steps: int = DEFAULT_MAX_STEPS):
    """Apply source to the encoded inputs, normalize and decode.

    Returns the decoded value and the normalization trace.
    """
    tree = _system_tree(source, system)
    stacked = apply_inputs(tree, list(inputs))
    if system in ("pll2", "nupll2"):
        normal, trace = normalize_finite(stacked, max_steps, postpone_promotions=True)
    else:
        normal, trace = shallow_normalize(stacked, max_steps)
    value = decode_value(normal, kind)
    logger.debug(f"Evaluated on {list(inputs)} in {len(trace.steps)} steps: {value!r}")
    return value, trace
