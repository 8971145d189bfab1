#!/usr/bin/env python3
"""
Relational semantics of proofs and coderivations.

Values live in the universe D built from a star by pairing and finite
multisets. A formula denotes a set of values (atoms range over a bounded
stratum D_k, ! and ? over multisets up to a size cap), a sequent a set of
tuples, and a derivation the union of its indexed approximants [[D]]_n,
computed clause by clause on the unfolding of a graph. The interpretation
is an oracle for cut elimination: a reduction step must not change the
stabilized point set.
"""

from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import rules as R
from cutelim import CutStep, applicable_steps, apply_step
from proofgraph import FINITE, NU, OPEN, ProofGraph, State, Unfolder, expand_nu, to_graph
from rules import Proof
from syntax import (
    Bang,
    Bot,
    DualVar,
    Exists,
    Forall,
    Formula,
    One,
    Par,
    ParseError,
    PreconditionError,
    Quest,
    SelectorExhausted,
    Tensor,
    Var,
    render,
)

# Set up logging
logger = logging.getLogger(__name__)

DEFAULT_UNIVERSE_LEVEL = 1
DEFAULT_MULTISET_CAP = 2
DEFAULT_POINT_CAP = 10**5
DEFAULT_MAX_INDEX = 64

EQUAL = "equal"
DIFFERENT = "different"
TRUNCATED = "truncated"
UNSTABLE = "unstable"


# ---------------------------------------------------------------------------
# The universe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Star:
    def __repr__(self):
        return "*"


STAR = Star()


@dataclass(frozen=True)
class Pair:
    left: "RelValue"
    right: "RelValue"

    def __repr__(self):
        return f"({self.left!r}, {self.right!r})"


@dataclass(frozen=True)
class Multiset:
    items: Tuple["RelValue", ...] = ()  # sorted by value_key

    @staticmethod
    def of(values: Iterable["RelValue"]) -> "Multiset":
        return Multiset(tuple(sorted(values, key=value_key)))

    def __add__(self, other: "Multiset") -> "Multiset":
        return Multiset.of(self.items + other.items)

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return "[" + ", ".join(repr(v) for v in self.items) + "]"


RelValue = Union[Star, Pair, Multiset]
Point = Tuple[RelValue, ...]

EMPTY = Multiset()


@functools.lru_cache(maxsize=None)
def value_key(v: RelValue) -> tuple:
    """Total order on values, used for canonical multisets and sorted output."""
    if isinstance(v, Star):
        return (0,)
    if isinstance(v, Pair):
        return (1, value_key(v.left), value_key(v.right))
    return (2, len(v.items), tuple(value_key(x) for x in v.items))


def point_key(point: Point) -> tuple:
    return tuple(value_key(v) for v in point)


def value_level(v: RelValue) -> int:
    """The least n with v in D_n."""
    if isinstance(v, Star):
        return 0
    if isinstance(v, Pair):
        return 1 + max(value_level(v.left), value_level(v.right))
    return 1 + max((value_level(x) for x in v.items), default=0)


def value_to_json(v: RelValue):
    if isinstance(v, Star):
        return "*"
    if isinstance(v, Pair):
        return [value_to_json(v.left), value_to_json(v.right)]
    return {"ms": [value_to_json(x) for x in v.items]}


def value_from_json(data) -> RelValue:
    if data == "*":
        return STAR
    if isinstance(data, list) and len(data) == 2:
        return Pair(value_from_json(data[0]), value_from_json(data[1]))
    if isinstance(data, dict) and isinstance(data.get("ms"), list):
        return Multiset.of(value_from_json(x) for x in data["ms"])
    raise ParseError(f"not a relational value: {data!r}")


@functools.lru_cache(maxsize=None)
def stratum(level: int, multiset_cap: int) -> Tuple[RelValue, ...]:
    """D_level with multisets of at most multiset_cap elements, sorted."""
    if level < 0:
        raise PreconditionError(f"universe level must be non-negative, got {level}")
    if level == 0:
        return (STAR,)
    below = stratum(level - 1, multiset_cap)
    values = {STAR}
    values.update(Pair(a, b) for a, b in itertools.product(below, repeat=2))
    for size in range(multiset_cap + 1):
        values.update(Multiset(tuple(c)) for c in itertools.combinations_with_replacement(below, size))
    # combinations follow the sorted order of below, so the tuples are already canonical
    return tuple(sorted(values, key=value_key))


@dataclass(frozen=True)
class Universe:
    """Bounds of an interpretation: atoms are D_level, multisets hold at most multiset_cap values."""
    level: int = DEFAULT_UNIVERSE_LEVEL
    multiset_cap: int = DEFAULT_MULTISET_CAP
    point_cap: int = DEFAULT_POINT_CAP

    def __post_init__(self):
        if self.level < 0 or self.multiset_cap < 0 or self.point_cap <= 0:
            raise PreconditionError(f"invalid universe bounds {self}")

    def atoms(self) -> Tuple[RelValue, ...]:
        return stratum(self.level, self.multiset_cap)

    def to_json(self) -> dict:
        return {"level": self.level, "multiset_cap": self.multiset_cap, "point_cap": self.point_cap}


@dataclass(frozen=True)
class PointSet:
    points: FrozenSet
    truncated: bool = False

    def __len__(self):
        return len(self.points)

    def __contains__(self, item):
        return item in self.points

    def sorted_points(self) -> list:
        key = point_key if self.points and isinstance(next(iter(self.points)), tuple) else value_key
        return sorted(self.points, key=key)

    def to_json(self) -> dict:
        def encode(p):
            return [value_to_json(v) for v in p] if isinstance(p, tuple) else value_to_json(p)
        return {"size": len(self.points), "truncated": self.truncated,
                "points": [encode(p) for p in self.sorted_points()]}


NOTHING = PointSet(frozenset())


def _collect(points: Iterable, cap: int, truncated: bool = False) -> PointSet:
    """At most cap distinct points; overflow sets the truncation flag."""
    seen = set()
    for p in points:
        if p in seen:
            continue
        if len(seen) >= cap:
            truncated = True
            break
        seen.add(p)
    return PointSet(frozenset(seen), truncated)


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

def _multisets(values: Sequence[RelValue], cap: int) -> Iterator[Multiset]:
    ordered = sorted(values, key=value_key)
    for size in range(cap + 1):
        for c in itertools.combinations_with_replacement(ordered, size):
            yield Multiset(c)


@functools.lru_cache(maxsize=4096)
def interp_formula(f: Formula, universe: Universe = Universe()) -> PointSet:
    """Bounded [[f]]: duals and quantifiers are transparent, ! and ? denote multisets."""
    if isinstance(f, (Var, DualVar)):
        return _collect(universe.atoms(), universe.point_cap)
    if isinstance(f, (One, Bot)):
        return PointSet(frozenset({STAR}))
    if isinstance(f, (Forall, Exists)):
        return interp_formula(f.body, universe)
    if isinstance(f, (Tensor, Par)):
        left, right = interp_formula(f.left, universe), interp_formula(f.right, universe)
        pairs = (Pair(a, b) for a, b in itertools.product(left.sorted_points(), right.sorted_points()))
        return _collect(pairs, universe.point_cap, left.truncated or right.truncated)
    if isinstance(f, (Bang, Quest)):
        body = interp_formula(f.body, universe)
        return _collect(_multisets(body.points, universe.multiset_cap), universe.point_cap, body.truncated)
    raise TypeError(f"not a formula: {f!r}")


def contains(f: Formula, v: RelValue, universe: Universe = Universe()) -> bool:
    """Structural membership of v in the bounded [[f]], without enumerating it."""
    if isinstance(f, (Var, DualVar)):
        return v in set(universe.atoms())
    if isinstance(f, (One, Bot)):
        return isinstance(v, Star)
    if isinstance(f, (Forall, Exists)):
        return contains(f.body, v, universe)
    if isinstance(f, (Tensor, Par)):
        return isinstance(v, Pair) and contains(f.left, v.left, universe) and contains(f.right, v.right, universe)
    if isinstance(f, (Bang, Quest)):
        return (isinstance(v, Multiset) and len(v) <= universe.multiset_cap
                and all(contains(f.body, x, universe) for x in v.items))
    raise TypeError(f"not a formula: {f!r}")


def in_sequent(point: Point, formulas: Sequence[Formula], universe: Universe = Universe()) -> bool:
    return len(point) == len(formulas) and all(contains(f, v, universe) for f, v in zip(formulas, point))


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

def interpretable_graph(source: Union[Proof, ProofGraph]) -> ProofGraph:
    """A graph without fp or nu vertices: promotions become cp loops, nu becomes a box."""
    g = to_graph(source) if isinstance(source, Proof) else source
    rules_used = {app.rule for app in g.vertices.values()}
    if rules_used & {"fp", "nu"}:
        if g.kind not in (FINITE, OPEN, NU):
            raise PreconditionError(f"a {g.kind} graph cannot contain fp or nu vertices")
        g = expand_nu(g)
    return g


class Interpreter:
    """[[D]]_n of the unfolding of a graph, memoized per (state, n)."""

    def __init__(self, source: Union[Proof, ProofGraph], universe: Universe = Universe()):
        self.graph = interpretable_graph(source)
        self.universe = universe
        self.unfolder = Unfolder(self.graph)
        self.exhausted = False
        self._memo: Dict[Tuple[State, int], PointSet] = {}

    @property
    def conclusion(self):
        return self.graph.conclusion

    def at(self, n: int, state: Optional[State] = None) -> PointSet:
        state = state if state is not None else (self.graph.root, 0)
        if n <= 0:
            return NOTHING
        key = (state, n)
        cached = self._memo.get(key)
        if cached is None:
            cached = self._compute(state, n)
            self._memo[key] = cached
        return cached

    def _compute(self, state: State, n: int) -> PointSet:
        try:
            app = self.unfolder.at_state(state)
        except SelectorExhausted as e:
            # beyond a finite oracle nothing is known about the stream
            logger.debug(f"Interpretation stops at {state}: {str(e)}")
            self.exhausted = True
            return PointSet(frozenset(), True)

        premises = [self.at(n - 1, child) for child in app.children]
        truncated = any(p.truncated for p in premises)
        cap = self.universe.point_cap
        rule, data = app.rule, app.data

        if rule == "hyp":
            return NOTHING
        if rule == "ax":
            a = app.conclusion[0]
            atoms = interp_formula(a, self.universe)
            return _collect(((x, x) for x in atoms.sorted_points()), cap, atoms.truncated)
        if rule == "one":
            return PointSet(frozenset({(STAR,)}))
        if rule == "cut":
            i, j = data[0], data[1]
            left, right = premises
            index: Dict[RelValue, List[Point]] = {}
            for y in right.points:
                index.setdefault(y[j], []).append(R.drop(y, j))
            joined = (R.drop(x, i) + rest for x in left.points for rest in index.get(x[i], ()))
            return _collect(joined, cap, truncated)
        if rule == "tensor":
            i, j = data
            left, right = premises
            combined = (R.drop(x, i) + R.drop(y, j) + (Pair(x[i], y[j]),)
                        for x in left.points for y in right.points)
            return _collect(combined, cap, truncated)
        if rule == "par":
            i, j = data
            return _collect((R.drop(x, i, j) + (Pair(x[i], x[j]),) for x in premises[0].points), cap, truncated)
        if rule == "bot":
            return _collect((x + (STAR,) for x in premises[0].points), cap, truncated)
        if rule == "w":
            return _collect((x + (EMPTY,) for x in premises[0].points), cap, truncated)
        if rule == "b":
            i, j = data
            grown = []
            for x in premises[0].points:
                bag = Multiset.of((x[i],)) + x[j]
                if len(bag) > self.universe.multiset_cap:
                    truncated = True
                    continue
                grown.append(R.drop(x, i, j) + (bag,))
            return _collect(grown, cap, truncated)
        if rule in ("forall", "exists"):
            i = data[0]
            return _collect((R.drop(x, i) + (x[i],) for x in premises[0].points), cap, truncated)
        if rule == "ex":
            (perm,) = data
            return _collect((tuple(x[k] for k in perm) for x in premises[0].points), cap, truncated)
        if rule == "cp":
            return self._promotion(app, premises, truncated)
        raise PreconditionError(f"no relational clause for rule {rule}")

    def _promotion(self, app, premises: List[PointSet], truncated: bool) -> PointSet:
        left, right = premises
        width = len(app.conclusion)
        points = [tuple(EMPTY for _ in range(width))]
        for x in left.points:
            for mu in right.points:
                bags = tuple(Multiset.of((a,)) + m for a, m in zip(x, mu))
                if any(len(bag) > self.universe.multiset_cap for bag in bags):
                    truncated = True
                    continue
                points.append(bags)
        return _collect(points, self.universe.point_cap, truncated)


def interp_derivation(source: Union[Proof, ProofGraph], n: int, universe: Universe = Universe()) -> PointSet:
    """The n-th approximant [[D]]_n; [[D]]_0 is empty."""
    return Interpreter(source, universe).at(n)


# ---------------------------------------------------------------------------
# Stabilization and invariance
# ---------------------------------------------------------------------------

@dataclass
class Approximants:
    sizes: List[int] = field(default_factory=list)
    stable_at: Optional[int] = None
    monotone: bool = True
    truncated: bool = False
    final: PointSet = NOTHING

    @property
    def stable(self) -> bool:
        return self.stable_at is not None

    def to_json(self) -> dict:
        return {"sizes": self.sizes, "stable_at": self.stable_at, "monotone": self.monotone,
                "truncated": self.truncated, "final": self.final.to_json()}


def stabilize(source: Union[Proof, ProofGraph], universe: Universe = Universe(),
              max_n: int = DEFAULT_MAX_INDEX, window: Optional[int] = None) -> Approximants:
    """
    Compute [[D]]_0, [[D]]_1, ... until the set stays the same for window
    consecutive indices (by default one more than the number of vertices, so
    that every cycle of the graph is traversed), or max_n is reached.

    Inclusion [[D]]_n in [[D]]_{n+1} is checked along the way and reported.
    """
    interp = Interpreter(source, universe)
    window = window if window is not None else len(interp.graph.reachable()) + 1
    result = Approximants()
    previous = interp.at(0)
    result.sizes.append(0)
    run_start = 0
    for n in range(1, max_n + 1):
        current = interp.at(n)
        result.sizes.append(len(current))
        result.truncated = result.truncated or current.truncated
        if not previous.points <= current.points:
            result.monotone = False
        if current.points != previous.points:
            run_start = n
        elif n - run_start >= window:
            result.stable_at = run_start
            result.final = current
            break
        previous = current
    if result.stable_at is None:
        result.final = previous
        logger.debug(f"No stabilization within {max_n} indices (sizes {result.sizes[-5:]})")
    return result


@dataclass
class InvarianceVerdict:
    verdict: str
    before: Approximants
    after: Approximants
    step: Optional[CutStep] = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "step": self.step.to_json() if self.step else None,
            "before": {"stable_at": self.before.stable_at, "size": len(self.before.final),
                       "truncated": self.before.truncated, "monotone": self.before.monotone},
            "after": {"stable_at": self.after.stable_at, "size": len(self.after.final),
                      "truncated": self.after.truncated, "monotone": self.after.monotone},
        }


def invariance_check(before: Union[Proof, ProofGraph], after: Union[Proof, ProofGraph],
                     universe: Universe = Universe(), max_n: int = DEFAULT_MAX_INDEX) -> InvarianceVerdict:
    """Compare the stabilized interpretations of two derivations; equality is claimed only untruncated."""
    a = stabilize(before, universe, max_n)
    b = stabilize(after, universe, max_n)
    if not (a.stable and b.stable):
        verdict = UNSTABLE
    elif a.truncated or b.truncated:
        verdict = TRUNCATED
    elif a.final.points == b.final.points:
        verdict = EQUAL
    else:
        verdict = DIFFERENT
    logger.debug(f"Invariance: {verdict} (stable at {a.stable_at} / {b.stable_at}, "
                 f"{len(a.final)} / {len(b.final)} points)")
    return InvarianceVerdict(verdict, a, b)


def check_step(tree: Proof, step: CutStep, universe: Universe = Universe(),
               max_n: int = DEFAULT_MAX_INDEX) -> InvarianceVerdict:
    verdict = invariance_check(tree, apply_step(tree, step), universe, max_n)
    verdict.step = step
    return verdict


def check_all_steps(tree: Proof, universe: Universe = Universe(),
                    max_n: int = DEFAULT_MAX_INDEX) -> List[InvarianceVerdict]:
    """One verdict per currently reducible cut of tree."""
    verdicts = [check_step(tree, step, universe, max_n) for step in applicable_steps(tree)]
    logger.info(f"Checked {len(verdicts)} cut steps on a proof of {render(list(tree.conclusion))}")
    return verdicts
