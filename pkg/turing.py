#!/usr/bin/env python3
"""
Turing machines over {0, 1}: descriptions, a direct simulator and their
compilation into terms.

A configuration is \\c. ((l * r) * q) * a where l and r are compositions
of c b over the cells left and right of the head, nearest cell outermost,
q is the tuple of state bits and a the advice stream (absent for machines
that never query it). The cell under the head is the nearest cell of r.

Tape ends follow the term encoding:
- reading past either end yields 0;
- a symbol written past the right end is lost;
- moving left at the left end leaves the head in place.

The output lists the left cells nearest first, then the right cells nearest
first, and reads that list backwards as a string.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from data_encodings import (
    BOOL,
    FALSE,
    LENGTH,
    LIFT,
    STREAM,
    STRING,
    WEAKEN_BOOL,
    bang,
    bits_type,
    compile_boolean_function,
    copies,
    copy_string,
    decode_string,
    encode_bool,
    encode_nat,
    encode_stream,
    encode_string,
    eraser,
    evaluate_polynomial,
    library_hints,
    nat_at,
    nat_tier,
    polynomial_function,
    string_at,
    tuple_type,
)
from lambda_calculus import (
    DEFAULT_BETA_CAP,
    DISC,
    POP,
    Abs,
    App,
    LetPair,
    LetUnit,
    Pair,
    Term,
    apply,
    beta_normalize,
    compose,
    identity,
    lam,
    let_tuple,
    tuple_term,
    var,
)
from selector import Selector
from syntax import ParseError, PreconditionError
from type_system import TUNIT, Arrow, TBang, TForall, TVar, Type

# Set up logging
logger = logging.getLogger(__name__)

RIGHT, LEFT = "R", "L"
_X = TVar("X")


@dataclass(frozen=True)
class Machine:
    """A machine with state_bits state bits and an optional advice bit per step.

    transitions maps (read, advice, state) to (write, next state, move);
    missing entries write the scanned bit back, keep the state and move right.
    """

    name: str
    state_bits: int
    initial_state: Tuple[int, ...]
    uses_advice: bool = False
    transitions: Dict[Tuple[int, int, Tuple[int, ...]], Tuple[int, Tuple[int, ...], str]] = field(default_factory=dict)

    def __post_init__(self):
        if self.state_bits < 1:
            raise PreconditionError(f"machine {self.name} needs at least one state bit")
        if len(self.initial_state) != self.state_bits:
            raise PreconditionError(f"initial state of {self.name} must have {self.state_bits} bits")
        for key, (write, nxt, move) in self.transitions.items():
            if len(key[2]) != self.state_bits or len(nxt) != self.state_bits or move not in (RIGHT, LEFT):
                raise PreconditionError(f"malformed transition {key} of {self.name}")

    def step(self, read: int, advice: int, state: Tuple[int, ...]) -> Tuple[int, Tuple[int, ...], str]:
        if not self.uses_advice:
            advice = 0
        return self.transitions.get((read, advice, tuple(state)), (read, tuple(state), RIGHT))

    def delta_bits(self, inputs: Tuple[int, ...]) -> Tuple[int, ...]:
        """The transition as a boolean function (read, [advice,] q..) -> (write, q'.., move)."""
        if self.uses_advice:
            read, advice, state = inputs[0], inputs[1], inputs[2:]
        else:
            read, advice, state = inputs[0], 0, inputs[1:]
        write, nxt, move = self.step(read, advice, state)
        return (write,) + tuple(nxt) + (int(move == RIGHT),)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "state_bits": self.state_bits,
            "initial_state": list(self.initial_state),
            "uses_advice": self.uses_advice,
            "transitions": [
                {"read": r, "advice": a, "state": list(q), "write": w, "next": list(n), "move": m}
                for (r, a, q), (w, n, m) in sorted(self.transitions.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Machine":
        try:
            k = int(data["state_bits"])
            uses_advice = bool(data.get("uses_advice", False))
            transitions = {}
            for entry in data.get("transitions", []):
                state = tuple(int(b) for b in entry["state"])
                key = (int(entry["read"]), int(entry.get("advice", 0)) if uses_advice else 0, state)
                transitions[key] = (int(entry["write"]), tuple(int(b) for b in entry["next"]), str(entry["move"]).upper())
            return cls(str(data.get("name", "machine")), k,
                       tuple(int(b) for b in data.get("initial_state", [0] * k)), uses_advice, transitions)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed machine description: {str(e)}") from None


def load_machine(path: str) -> Machine:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: {e.msg}", e.lineno, e.colno) from None
    return Machine.from_json(data)


def _table(k: int, uses_advice: bool, rule) -> dict:
    """Transition table from rule(read, advice, state) -> (write, next, move)."""
    table = {}
    for read in (0, 1):
        for advice in ((0, 1) if uses_advice else (0,)):
            for code in range(2 ** k):
                state = tuple(int(b) for b in format(code, f"0{k}b"))
                table[(read, advice, state)] = rule(read, advice, state)
    return table


def _increment(read, advice, state):
    """Walk left over 1s and turn the first 0 into 1."""
    if state == (0,):
        return 1, ((0,) if read else (1,)), LEFT
    return read, state, LEFT


def example_machines() -> Dict[str, Machine]:
    machines = [
        Machine("identity", 1, (0,)),
        Machine("flip", 1, (0,), False,
                _table(1, False, lambda b, h, q: (1 - b, q, LEFT))),
        Machine("prefix_parity", 1, (0,), False,
                _table(1, False, lambda b, h, q: (b ^ q[0], (b ^ q[0],), LEFT))),
        Machine("advice_xor", 1, (0,), True,
                _table(1, True, lambda b, h, q: (b ^ h, q, LEFT))),
        Machine("unary_increment", 1, (0,), False, _table(1, False, _increment)),
    ]
    return {m.name: m for m in machines}


# ---------------------------------------------------------------------------
# Direct simulation
# ---------------------------------------------------------------------------

@dataclass
class Tape:
    left: List[int]    # nearest cell first
    right: List[int]   # cell under the head first

    def read(self) -> int:
        return self.right[0] if self.right else 0

    def move(self, write: int, direction: str):
        has_right = bool(self.right)
        near_left = self.left[:1]
        written = [write] if has_right else []
        rest_left, rest_right = self.left[1:], self.right[1:]
        if direction == RIGHT:
            self.left = written + near_left + rest_left
            self.right = rest_right
        else:
            self.left = rest_left
            self.right = near_left + written + rest_right

    def output(self) -> str:
        return "".join(str(b) for b in reversed(self.left + self.right))


@dataclass
class SimulationResult:
    output: str
    state: Tuple[int, ...]
    queries: int
    tape: Tape

    def to_json(self) -> dict:
        return {"output": self.output, "state": list(self.state), "queries": self.queries,
                "left": self.tape.left, "right": self.tape.right}


def simulate(machine: Machine, s: str, steps: int, blanks: int,
             advice: Optional[Selector] = None) -> SimulationResult:
    """Run machine on s written over blanks blank cells, for steps steps."""
    if machine.uses_advice and advice is None:
        raise PreconditionError(f"machine {machine.name} needs an advice stream")
    tape = Tape([], [0] * blanks)
    for ch in s:
        tape.move(int(ch), RIGHT)
    state = machine.initial_state
    for i in range(steps):
        bit = advice.at(i) if machine.uses_advice else 0
        write, state, move = machine.step(tape.read(), bit, state)
        tape.move(write, move)
    logger.debug(f"Simulated {machine.name} on {s!r} for {steps} steps: {tape.output()!r}")
    return SimulationResult(tape.output(), state, steps if machine.uses_advice else 0, tape)


def pack_symbols(word: str) -> str:
    """Three-letter words over _, 0, 1 as bit pairs 00, 01, 11."""
    codes = {"_": "00", "0": "01", "1": "11"}
    try:
        return "".join(codes[ch] for ch in word)
    except KeyError as e:
        raise PreconditionError(f"cannot pack symbol {e.args[0]!r}") from None


def unpack_symbols(bits: str) -> str:
    codes = {"00": "_", "01": "0", "11": "1"}
    if len(bits) % 2:
        raise PreconditionError("packed words have even length")
    try:
        return "".join(codes[bits[i:i + 2]] for i in range(0, len(bits), 2))
    except KeyError as e:
        raise PreconditionError(f"{e.args[0]!r} is not a packed symbol") from None


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompiledMachine:
    machine: Machine
    init: Term
    In: Term
    dec: Term
    comp: Term
    Tr: Term
    Ext: Term
    write_right: Term
    delta: Term
    types: Dict[str, Type]

    def terms(self) -> Dict[str, Term]:
        return {"init": self.init, "In": self.In, "dec": self.dec, "comp": self.comp,
                "Tr": self.Tr, "Ext": self.Ext, "T": self.write_right, "delta": self.delta}

    def hints(self) -> Dict[Term, Type]:
        hints = library_hints()
        for name, term in self.terms().items():
            hints[term] = self.types[name]
        return hints


def machine_types(k: int, uses_advice: bool) -> Dict[str, Type]:
    x = _X
    fx = Arrow(x, x)
    cell = Arrow(BOOL, fx)
    tail = (STREAM,) if uses_advice else ()
    tm = TForall("X", Arrow(TBang(cell), tuple_type(fx, fx, bits_type(k), *tail)))
    idt = TForall("X", Arrow(TBang(cell), tuple_type(fx, fx, cell, BOOL, cell, BOOL, bits_type(k), *tail)))
    delta = bits_type(k + 2)
    for _ in range(k + (2 if uses_advice else 1)):
        delta = Arrow(BOOL, delta)
    init = Arrow(nat_at(tm), Arrow(STREAM, tm) if uses_advice else tm)
    return {
        "TM": tm, "ID": idt, "init": init, "In": Arrow(string_at(tm), Arrow(tm, tm)),
        "dec": Arrow(tm, idt), "comp": Arrow(idt, tm), "Tr": Arrow(tm, tm),
        "Ext": Arrow(tm, STRING), "T": Arrow(BOOL, Arrow(idt, tm)), "delta": delta,
    }


def compile_tm(machine: Machine) -> CompiledMachine:
    k, adv = machine.state_bits, machine.uses_advice
    qs = [f"q{i}" for i in range(k)]
    nqs = [f"n{i}" for i in range(k)]
    conf = ["l", "r", "q"] + (["a"] if adv else [])
    parts = ["sl", "sr", "cl", "bl", "cr", "br", "q"] + (["a"] if adv else [])
    tail = [var("a")] if adv else []

    erase_cell = Abs("x", LetUnit(App(WEAKEN_BOOL, var("x")), identity()))
    start = tuple_term(identity(), erase_cell, FALSE)

    # F c peels one cell: (g, h, i) |-> (h i . g, c, b)
    peel = lam(["b", "t"], let_tuple(var("t"), ["g", "h", "i"],
                                     tuple_term(compose(App(var("h"), var("i")), var("g")), var("c"), var("b"))))
    dec = lam(["m", "c"], let_tuple(App(var("m"), peel), conf,
                                    let_tuple(App(var("l"), start), ["sl", "cl", "bl"],
                                              let_tuple(App(var("r"), start), ["sr", "cr", "br"],
                                                        tuple_term(*(var(p) for p in parts))))))

    write_right = lam(["b", "s", "c"], let_tuple(
        App(var("s"), var("c")), parts,
        LetUnit(App(WEAKEN_BOOL, var("br")),
                tuple_term(compose(App(var("cr"), var("b")), App(var("cl"), var("bl")), var("sl")),
                           var("sr"), var("q"), *tail))))

    delta = compile_boolean_function(machine.delta_bits, 1 + int(adv) + k, k + 2)
    swapped = tuple_term(
        compose(var("u"), var("v"), var("pl")), var("pr"))
    body: Term = tuple_term(var("nl"), var("nr"), tuple_term(*(var(n) for n in nqs)), *([var("t")] if adv else []))
    body = LetPair(App(var("m3"), swapped), "nl", "nr", body)
    body = LetPair(App(var("m2"), Pair(App(var("cr"), var("w")), App(var("cl"), var("bl")))), "u", "v", body)
    body = LetPair(App(var("m1"), Pair(var("sl"), var("sr"))), "pl", "pr", body)
    body = copies(var("mv"), ["m1", "m2", "m3"], body)
    args = [var("br")] + ([var("h")] if adv else []) + [var(q) for q in qs]
    body = let_tuple(apply(delta, *args), ["w"] + nqs + ["mv"], body)
    body = let_tuple(var("q"), qs, body)
    if adv:
        body = LetPair(App(POP, var("a")), "h", "t", body)
    comp = lam(["s", "c"], let_tuple(App(var("s"), var("c")), parts, body))

    tr = compose(comp, dec)
    step = Abs("b", compose(App(write_right, var("b")), dec))
    read_in = lam(["s", "m"], apply(var("s"), step, var("m")))

    add_blank = lam(["m", "c"], let_tuple(App(var("m"), var("c")), conf,
                                          tuple_term(var("l"), compose(App(var("c"), FALSE), var("r")), var("q"), *tail)))
    q0 = tuple_term(*(encode_bool(b) for b in machine.initial_state))
    empty = Abs("c", tuple_term(identity(), identity(), q0, *tail))
    filled = apply(var("n"), add_blank, empty)
    init = Abs("n", Abs("a", filled) if adv else filled)

    junk = tuple_term(var("q"), App(DISC, var("a"))) if adv else var("q")
    junk_type = tuple_type(bits_type(k), TUNIT) if adv else bits_type(k)
    ext = lam(["m", "c"], let_tuple(App(var("m"), var("c")), conf,
                                    LetUnit(App(eraser(junk_type), junk), compose(var("l"), var("r")))))

    logger.debug(f"Compiled machine {machine.name} with {k} state bits")
    return CompiledMachine(machine, init, read_in, dec, comp, tr, ext, write_right, delta,
                           machine_types(k, adv))


def run_term(compiled: CompiledMachine, s: str, steps: int, blanks: int,
             advice: Optional[Selector] = None) -> Term:
    """Ext (steps Tr (In s (init blanks [advice])))."""
    init = apply(compiled.init, encode_nat(blanks))
    if compiled.machine.uses_advice:
        if advice is None:
            raise PreconditionError(f"machine {compiled.machine.name} needs an advice stream")
        init = App(init, encode_stream(advice))
    loaded = apply(compiled.In, encode_string(s), init)
    return App(compiled.Ext, apply(encode_nat(steps), compiled.Tr, loaded))


def run_compiled(compiled: CompiledMachine, s: str, steps: int, blanks: int,
                 advice: Optional[Selector] = None, cap: int = DEFAULT_BETA_CAP) -> str:
    return decode_string(run_term(compiled, s, steps, blanks, advice), cap)


def _count(variable: Term, coefficients: Sequence[int]) -> Term:
    """Length of a string copy at the type the polynomial expects."""
    length = App(LENGTH, variable)
    return length if len(coefficients) <= 2 else App(LIFT, length)


def compile_function(machine: Machine, time: Sequence[int], space: Sequence[int],
                     advice: Optional[Selector] = None) -> Term:
    """\\s. Ext (P(|s|) Tr (In s (init Q(|s|) advice))) as a closed term.

    The input is copied three times; two copies are measured and fed to the
    Horner terms of the time polynomial P and the space polynomial Q.
    """
    compiled = compile_tm(machine)
    steps = App(polynomial_function(time), _count(var("s2"), time))
    blanks = App(polynomial_function(space), _count(var("s3"), space))
    init = App(compiled.init, blanks)
    if machine.uses_advice:
        if advice is None:
            raise PreconditionError(f"machine {machine.name} needs an advice stream")
        init = App(init, encode_stream(advice))
    run = App(compiled.Ext, apply(steps, compiled.Tr, apply(compiled.In, var("s1"), init)))
    return Abs("s", let_tuple(App(copy_string(3), var("s")), ["s1", "s2", "s3"], run))


def _measured_base(coefficients: Sequence[int], tm: Type) -> Type:
    """Base of the string copy whose length feeds the Horner term."""
    d = len(coefficients) - 1
    if d == 1:
        return nat_tier(1, tm)
    return bang(nat_tier(d + 1, tm), d - 1)


def function_type(machine: Machine, time: Sequence[int], space: Sequence[int]) -> Type:
    """S[S_TM * S_P * S_Q] -o S, the declared type of compile_function."""
    tm = machine_types(machine.state_bits, machine.uses_advice)["TM"]
    strings = tuple_type(string_at(tm), string_at(_measured_base(time, tm)), string_at(_measured_base(space, tm)))
    return Arrow(string_at(strings), STRING)


def function_hints(machine: Machine, time: Sequence[int], space: Sequence[int]) -> Dict[Term, Type]:
    compiled = compile_tm(machine)
    tm = compiled.types["TM"]
    hints = compiled.hints()
    for coefficients in (time, space):
        d = len(coefficients) - 1
        hints[polynomial_function(coefficients)] = Arrow(bang(nat_tier(d + 1, tm), d - 1), nat_tier(1, tm))
    return hints


def evaluate_function(machine: Machine, time: Sequence[int], space: Sequence[int], s: str,
                      advice: Optional[Selector] = None, cap: int = DEFAULT_BETA_CAP) -> str:
    term = App(compile_function(machine, time, space, advice), encode_string(s))
    return decode_string(beta_normalize(term, cap), cap)


def reference_function(machine: Machine, time: Sequence[int], space: Sequence[int], s: str,
                       advice: Optional[Selector] = None) -> str:
    n = len(s)
    return simulate(machine, s, evaluate_polynomial(time, n), evaluate_polynomial(space, n), advice).output
