import pytest

from bench import bench_input, fit_loglog, parse_lengths, run_bench
from representation import S, identity_proof
from syntax import PreconditionError


def test_parse_lengths():
    assert parse_lengths("1..3") == [1, 2, 3]
    assert parse_lengths("2,4, 8") == [2, 4, 8]
    for text in ("0", "a..b", ""):
        with pytest.raises(PreconditionError):
            parse_lengths(text)


def test_bench_inputs():
    assert bench_input(4) == "0101"
    assert bench_input(3, "ones") == "111"
    assert bench_input(5, "random", seed=2) == bench_input(5, "random", seed=2)
    with pytest.raises(PreconditionError):
        bench_input(3, "stripes")


def test_fit_loglog():
    slope, intercept = fit_loglog([1, 2, 4], [1, 4, 16])
    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(0.0, abs=1e-9)
    assert fit_loglog([3, 3], [5, 6]) == (None, None)


def test_run_bench_on_the_identity():
    report = run_bench(identity_proof(S), [1, 2, 4], kind="string", jobs=2)
    assert [row.output for row in report.rows] == ["0", "01", "0101"]
    assert all(row.steps > 0 for row in report.rows)
    assert report.slope is not None
    assert report.to_json()["system"] == "pll2"
    assert "log-log slope" in report.table()
