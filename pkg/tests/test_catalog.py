import pytest

from catalog import CATALOG, d_quest, lookup
from criteria import criteria_flags
from proofgraph import NU, REGULAR, WEAKLY_REGULAR, infer_kind, require_valid
from semantics import stabilize
from syntax import ParseError


def test_lookup():
    assert set(CATALOG) >= {"zero", "one", "d_abs", "d_bot", "nwb_over_axioms", "bit_stream"}
    with pytest.raises(ParseError):
        lookup("d_top")


def test_declared_kinds():
    assert lookup("bit_stream").kind == NU
    assert lookup("bit_box").kind == WEAKLY_REGULAR
    for name in set(CATALOG) - {"bit_box"}:
        g = lookup(name)
        assert infer_kind(g) == g.kind, name


def test_d_quest_absorbs_forever_without_progressing():
    g = d_quest()
    assert g.kind == REGULAR
    require_valid(g)
    flags = criteria_flags(g)
    assert not flags["progressing"]
    assert not flags["weakly_progressing"]
    result = stabilize(g)
    assert result.stable_at == 0
    assert len(result.final) == 0
