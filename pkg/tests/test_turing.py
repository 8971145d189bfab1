import json

import pytest

from selector import Selector
from syntax import ParseError, PreconditionError
from turing import (LEFT, Machine, compile_tm, evaluate_function, example_machines, load_machine, pack_symbols,
                    reference_function, run_compiled, simulate, unpack_symbols)

MACHINES = example_machines()
ADVICE = Selector.periodic(2, (), (1, 0))


def test_simulate_writes_input_over_blanks():
    result = simulate(MACHINES["identity"], "01", 0, 3)
    assert result.tape.left == [1, 0]
    assert result.output == "001"
    assert result.queries == 0


def test_simulate_flip():
    result = simulate(MACHINES["flip"], "1", 1, 2)
    assert result.tape.right == [1, 1]
    assert result.output == "11"


def test_advice_is_required():
    with pytest.raises(PreconditionError):
        simulate(MACHINES["advice_xor"], "1", 1, 1)
    assert simulate(MACHINES["advice_xor"], "1", 2, 2, ADVICE).queries == 2


@pytest.mark.parametrize("name", ["identity", "flip", "prefix_parity", "unary_increment", "advice_xor"])
def test_compiled_machine_agrees_with_simulation(name):
    machine = MACHINES[name]
    advice = ADVICE if machine.uses_advice else None
    expected = simulate(machine, "10", 2, 2, advice).output
    assert run_compiled(compile_tm(machine), "10", 2, 2, advice) == expected


def test_compiled_function_agrees_with_reference():
    machine = MACHINES["flip"]
    assert evaluate_function(machine, [0, 1], [1, 1], "1") == reference_function(machine, [0, 1], [1, 1], "1")


def test_machine_descriptions(tmp_path):
    machine = MACHINES["prefix_parity"]
    assert Machine.from_json(machine.to_json()) == machine
    path = tmp_path / "parity.json"
    path.write_text(json.dumps(machine.to_json()))
    assert load_machine(str(path)) == machine
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ParseError):
        load_machine(str(bad))
    with pytest.raises(ParseError):
        Machine.from_json({"name": "x"})
    with pytest.raises(PreconditionError):
        Machine("empty", 0, ())
    with pytest.raises(PreconditionError):
        Machine("short", 2, (0,), False, {(0, 0, (0,)): (1, (0,), LEFT)})


def test_symbol_packing():
    assert pack_symbols("_01") == "000111"
    assert unpack_symbols("000111") == "_01"
    with pytest.raises(PreconditionError):
        pack_symbols("2")
    with pytest.raises(PreconditionError):
        unpack_symbols("10")
