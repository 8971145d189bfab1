import pytest

import catalog
import rules as R
from criteria import (criteria_flags, detect_nwbs, follow_thread, hypertruncate, measure, offending_cycle,
                      truncate)
from proofgraph import approximates, expand_fp, expand_nu, to_graph
from syntax import DualVar, PreconditionError, ValidationError, Var

X, NX = Var("X"), DualVar("X")


def test_flags_of_the_axiom_box():
    flags = criteria_flags(catalog.nwb_over_axioms())
    assert flags == {"finitely_expandable": True, "weakly_progressing": True,
                     "progressing": True, "weakly_regular": True}
    assert offending_cycle(catalog.nwb_over_axioms()) is None


def test_cut_loop_is_neither_expandable_nor_progressing():
    g = catalog.d_bot()
    flags = criteria_flags(g)
    assert not flags["finitely_expandable"]
    assert not flags["weakly_progressing"]
    assert not flags["progressing"]
    assert offending_cycle(g) == ["v0"]


def test_weakly_progressing_but_not_progressing():
    g = catalog.nonprogressing()
    flags = criteria_flags(g)
    assert flags["weakly_progressing"]
    assert not flags["progressing"]
    assert offending_cycle(g)


def test_thread_progress_along_the_main_branch():
    thread = follow_thread(catalog.nwb_over_axioms(), (2, 2, 2), 1)
    assert thread.polarity == "bang"
    assert thread.progress == 3
    assert len(thread.elements) == 4
    with pytest.raises(ValidationError):
        follow_thread(catalog.d_bot(), (), 0)


def test_detect_nwbs():
    (nwb,) = detect_nwbs(catalog.nwb_over_axioms())
    assert nwb.main == ("v0",)
    assert nwb.calls == ("a",)
    assert not nwb.boxed
    (boxed,) = detect_nwbs(expand_nu(catalog.bit_stream()))
    assert boxed.boxed
    assert len(boxed.calls) == 2


def test_measure_of_a_single_box():
    report = measure(catalog.nwb_over_axioms())
    assert report.depth == 1
    assert report.prebar == [()]
    assert report.base_size == 1
    assert report.cosize == 2
    assert report.cosize_at == [1, 1]
    assert report.s == 1
    assert report.nesting == {"v0": [0], "a": [1]}


def test_measure_of_nested_promotions():
    g = expand_fp(to_graph(R.fp(R.fp(R.ax(X)))))
    report = measure(g)
    assert report.depth == 2
    assert report.cosize == 3
    assert report.to_json()["depth"] == 2


def test_measure_rejects_non_progressing_graphs():
    with pytest.raises(PreconditionError):
        measure(catalog.d_bot())
    with pytest.raises(PreconditionError):
        measure(catalog.bit_stream())


def test_truncations_approximate():
    g = catalog.nwb_over_axioms()
    t = truncate(g, 2)
    rules = sorted(app.rule for app in t.vertices.values())
    assert rules == ["ax", "cp", "cp", "hyp"]
    assert t.conclusion == g.conclusion
    assert approximates(t, g)
    h = hypertruncate(g, 1)
    assert approximates(h, g)
    with pytest.raises(ValidationError):
        truncate(g, 0)
