import pytest

from selector import Selector, fuse, periodic_from_sequence
from syntax import ParseError, SelectorExhausted, ValidationError


def test_periodic_selector_repeats_after_prefix():
    s = Selector.periodic(3, prefix=[2], period=[0, 1])
    assert s.take(6) == [2, 0, 1, 0, 1, 0]
    assert s.horizon() == 3
    assert s.support() == (0, 1, 2)


def test_shift_matches_offset_lookup():
    s = Selector.periodic(3, prefix=[2, 2], period=[0, 1, 2])
    for n in range(7):
        assert s.shift(n).take(5) == [s.at(n + i) for i in range(5)]


def test_table_selector_exhausts_with_absolute_index():
    s = Selector.from_table(2, [1, 0, 1])
    assert s.take(3) == [1, 0, 1]
    shifted = s.shift(2)
    assert shifted.at(0) == 1
    with pytest.raises(SelectorExhausted) as info:
        shifted.at(1)
    assert info.value.index == 3
    assert info.value.domain == 3


def test_validation_rejects_out_of_range_indices():
    with pytest.raises(ValidationError) as info:
        Selector.periodic(2, period=[0, 2]).validate()
    assert info.value.violations
    assert Selector.periodic(2, period=[]).check()
    assert Selector.constant(1).validate().take(2) == [0, 0]


def test_restricted_renumbers_support():
    s = Selector.periodic(5, period=[4, 1])
    restricted, support = s.restricted()
    assert support == (1, 4)
    assert restricted.calls == 2
    assert restricted.take(4) == [1, 0, 1, 0]


def test_fuse_uses_lcm_period():
    a = Selector.periodic(2, period=[0, 1])
    b = Selector.periodic(3, period=[0, 1, 2])
    fused, pairs = fuse(a, b)
    assert len(fused.period) == 6
    for i in range(12):
        assert pairs[fused.at(i)] == (a.at(i), b.at(i))


def test_fuse_with_table_is_table():
    a = Selector.from_table(2, [0, 1, 1])
    b = Selector.constant(1)
    fused, pairs = fuse(a, b)
    assert fused.is_table
    assert [pairs[v] for v in fused.table] == [(0, 0), (1, 0), (1, 0)]


def test_json_and_sequence_constructors():
    s = periodic_from_sequence([1, 0, 1], 1, 2)
    assert s.take(5) == [1, 0, 1, 0, 1]
    assert Selector.from_json(s.to_json()) == s
    with pytest.raises(ParseError):
        Selector.from_json({"calls": 2})
