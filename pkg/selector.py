#!/usr/bin/env python3
"""
Finitely presented call selectors for streams and non-wellfounded boxes.

A selector maps every index i to the call chosen at position i. It is given
either as a finite prefix followed by a periodic tail (total), or as a finite
oracle table that raises SelectorExhausted past its domain.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from syntax import ParseError, SelectorExhausted, ValidationError

# Set up logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Selector:
    calls: int
    prefix: Tuple[int, ...] = ()
    period: Tuple[int, ...] = ()
    table: Optional[Tuple[int, ...]] = None
    origin: int = field(default=0, compare=False)  # absolute index of position 0

    @classmethod
    def periodic(cls, calls: int, prefix: Sequence[int] = (), period: Sequence[int] = (0,)) -> "Selector":
        return cls(calls, tuple(prefix), tuple(period))

    @classmethod
    def constant(cls, calls: int, index: int = 0) -> "Selector":
        return cls(calls, (), (index,))

    @classmethod
    def from_table(cls, calls: int, table: Sequence[int]) -> "Selector":
        return cls(calls, table=tuple(table))

    @property
    def is_table(self) -> bool:
        return self.table is not None

    @property
    def is_periodic(self) -> bool:
        return self.table is None

    def check(self) -> List[str]:
        """Violations of the selector contract, empty when well-formed."""
        problems = []
        if self.calls <= 0:
            problems.append("selector must range over at least one call")
        values = self.table if self.is_table else self.prefix + self.period
        if self.is_periodic and not self.period:
            problems.append("periodic selector needs a non-empty period")
        for v in values:
            if not 0 <= v < self.calls:
                problems.append(f"selector index {v} outside [0, {self.calls})")
        return problems

    def validate(self) -> "Selector":
        problems = self.check()
        if problems:
            raise ValidationError("; ".join(problems), problems)
        return self

    def at(self, i: int) -> int:
        if self.is_table:
            if i >= len(self.table):
                raise SelectorExhausted(self.origin + i, self.origin + len(self.table))
            return self.table[i]
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def shift(self, n: int = 1) -> "Selector":
        """The selector i -> self.at(i + n)."""
        if n == 0:
            return self
        if self.is_table:
            return Selector(self.calls, table=self.table[n:], origin=self.origin + n)
        if n <= len(self.prefix):
            return Selector(self.calls, self.prefix[n:], self.period, origin=self.origin + n)
        k = (n - len(self.prefix)) % len(self.period)
        return Selector(self.calls, (), self.period[k:] + self.period[:k], origin=self.origin + n)

    def horizon(self) -> int:
        """Number of positions after which the behaviour repeats or ends."""
        if self.is_table:
            return len(self.table)
        return len(self.prefix) + len(self.period)

    def support(self) -> Tuple[int, ...]:
        """Sorted indices of the calls actually selected."""
        values = self.table if self.is_table else self.prefix + self.period
        return tuple(sorted(set(values)))

    def take(self, n: int) -> List[int]:
        return [self.at(i) for i in range(n)]

    def reindex(self, mapping: Dict[int, int], calls: int) -> "Selector":
        """Rename call indices through mapping, over a new call count."""
        if self.is_table:
            return Selector(calls, table=tuple(mapping[v] for v in self.table), origin=self.origin)
        return Selector(calls, tuple(mapping[v] for v in self.prefix),
                        tuple(mapping[v] for v in self.period), origin=self.origin)

    def restricted(self) -> Tuple["Selector", Tuple[int, ...]]:
        """Selector over its own support, and the support itself."""
        support = self.support()
        mapping = {old: new for new, old in enumerate(support)}
        return self.reindex(mapping, len(support)), support

    def to_json(self) -> dict:
        data = {"calls": self.calls}
        if self.is_table:
            data["table"] = list(self.table)
        else:
            data["prefix"] = list(self.prefix)
            data["period"] = list(self.period)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "Selector":
        try:
            if "table" in data:
                return cls.from_table(int(data["calls"]), [int(v) for v in data["table"]])
            return cls.periodic(int(data["calls"]), [int(v) for v in data.get("prefix", [])],
                                [int(v) for v in data["period"]])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed selector: {str(e)}") from None


def fuse(a: Selector, b: Selector) -> Tuple[Selector, List[Tuple[int, int]]]:
    """Pairwise selector i -> (a.at(i), b.at(i)).

    Returns the fused selector over the list of distinct pairs, and that list.
    Periodic inputs give a periodic result with the lcm of both periods; as
    soon as one side is a table the result is a table over the shorter domain.
    """
    if a.is_table or b.is_table:
        limit = min(x.horizon() if x.is_table else math.inf for x in (a, b))
        pairs_seq = [(a.at(i), b.at(i)) for i in range(int(limit))]
        pairs = sorted(set(pairs_seq))
        index = {p: n for n, p in enumerate(pairs)}
        return Selector(max(len(pairs), 1), table=tuple(index[p] for p in pairs_seq)), pairs
    lead = max(len(a.prefix), len(b.prefix))
    cycle = math.lcm(len(a.period), len(b.period))
    pairs_seq = [(a.at(i), b.at(i)) for i in range(lead + cycle)]
    pairs = sorted(set(pairs_seq))
    index = {p: n for n, p in enumerate(pairs)}
    coded = [index[p] for p in pairs_seq]
    fused = Selector(len(pairs), tuple(coded[:lead]), tuple(coded[lead:]))
    logger.debug(f"Fused selectors into {len(pairs)} call pairs, period {cycle}")
    return fused, pairs


def periodic_from_sequence(sequence: Sequence[int], loop_start: int, calls: int) -> Selector:
    """Selector reading sequence[:loop_start] once, then sequence[loop_start:] forever."""
    return Selector(calls, tuple(sequence[:loop_start]), tuple(sequence[loop_start:]))
