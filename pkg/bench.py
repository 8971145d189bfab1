#!/usr/bin/env python3
"""
Step-count benchmarking of representation proofs.

A proof is evaluated on inputs of increasing length; the number of
cut-elimination steps is tabulated and log(steps) is fitted against
log(length) to estimate the degree of the polynomial modulus.
"""

import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from normalizer import DEFAULT_MAX_STEPS, eval_representation
from proofgraph import ProofGraph
from rules import Proof
from syntax import PreconditionError

# Set up logging
logger = logging.getLogger(__name__)

SLOPE_TOLERANCE = 0.5
INPUT_PATTERNS = ("alternating", "zeros", "ones", "random")


@dataclass
class BenchRow:
    length: int
    input: str
    steps: int
    output: object = None

    def to_json(self) -> dict:
        return {"length": self.length, "input": self.input, "steps": self.steps, "output": self.output}


@dataclass
class BenchReport:
    system: str
    rows: List[BenchRow] = field(default_factory=list)
    slope: Optional[float] = None
    intercept: Optional[float] = None
    expected_degree: Optional[int] = None

    @property
    def degree(self) -> Optional[int]:
        """The integer degree the fitted slope rounds to."""
        return None if self.slope is None else max(0, round(self.slope))

    @property
    def within_bound(self) -> Optional[bool]:
        if self.slope is None:
            return None
        bound = self.expected_degree if self.expected_degree is not None else self.degree
        return self.slope <= bound + SLOPE_TOLERANCE

    def table(self) -> str:
        lines = [f"{'n':>4}  {'steps':>10}  input"]
        for row in self.rows:
            lines.append(f"{row.length:>4}  {row.steps:>10}  {row.input}")
        if self.slope is not None:
            lines.append(f"log-log slope {self.slope:.3f} (degree {self.degree}, within bound: {self.within_bound})")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "rows": [r.to_json() for r in self.rows],
            "slope": self.slope,
            "intercept": self.intercept,
            "degree": self.degree,
            "expected_degree": self.expected_degree,
            "within_bound": self.within_bound,
        }


def parse_lengths(text: str) -> List[int]:
    """'1..8' or '1,2,4,8' into a list of positive lengths."""
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            lengths = list(range(int(low), int(high) + 1))
        else:
            lengths = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise PreconditionError(f"cannot read input lengths from {text!r}") from None
    if not lengths or any(n <= 0 for n in lengths):
        raise PreconditionError(f"input lengths must be positive, got {text!r}")
    return lengths


def bench_input(length: int, pattern: str = "alternating", seed: int = 0) -> str:
    """A bit string of the given length."""
    if pattern == "alternating":
        return "".join("01"[k % 2] for k in range(length))
    if pattern == "zeros":
        return "0" * length
    if pattern == "ones":
        return "1" * length
    if pattern == "random":
        rng = random.Random(seed * 1000 + length)
        return "".join(rng.choice("01") for _ in range(length))
    raise PreconditionError(f"unknown input pattern {pattern!r}")


def fit_loglog(lengths: Sequence[int], steps: Sequence[int]):
    """Least-squares line through (log n, log steps); None when fewer than two usable points."""
    points = [(n, s) for n, s in zip(lengths, steps) if n > 0 and s > 0]
    if len(points) < 2 or len({n for n, _ in points}) < 2:
        return None, None
    x = np.log(np.array([n for n, _ in points], dtype=float))
    y = np.log(np.array([s for _, s in points], dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def run_bench(source: Union[Proof, ProofGraph], lengths: Sequence[int], system: str = "pll2",
              kind: Optional[str] = None, pattern: str = "alternating", seed: int = 0,
              max_steps: int = DEFAULT_MAX_STEPS, jobs: int = 1,
              expected_degree: Optional[int] = None, show_progress: bool = False) -> BenchReport:
    """Evaluate source on one input per length and fit the step counts."""
    inputs = [bench_input(n, pattern, seed) for n in lengths]

    def measure(s: str) -> BenchRow:
        value, trace = eval_representation(source, [s], system, kind, max_steps)
        return BenchRow(len(s), s, len(trace.steps), value)

    report = BenchReport(system, expected_degree=expected_degree)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        with tqdm(total=len(inputs), desc="Benchmarking", unit="input", disable=not show_progress) as pbar:
            for row in executor.map(measure, inputs):
                report.rows.append(row)
                pbar.update(1)

    report.slope, report.intercept = fit_loglog([r.length for r in report.rows], [r.steps for r in report.rows])
    if report.slope is not None:
        logger.info(f"Fitted slope {report.slope:.3f} over lengths {list(lengths)} "
                    f"(about {math.exp(report.intercept):.1f} * n^{report.slope:.2f} steps)")
    else:
        logger.warning("Not enough distinct lengths to fit a slope")
    return report
