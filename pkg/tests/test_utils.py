"""Tests for the worker pool, JSON codec, console reporter and construction trace."""

from fractions import Fraction

import pytest
from rich.console import Console

from haar_factor.core.errors import InputFormatError
from haar_factor.core.operators import OperatorMatrix
from haar_factor.core.quasi_diag import quasi_diagonalize
from haar_factor.core.trace import ConstructionTrace, note
from haar_factor.utils.codec import load_json, write_json
from haar_factor.utils.reporting import Reporter
from haar_factor.utils.workers import THREADS_ENV, parallel_map, worker_count


def test_worker_count(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert worker_count(3) == 3
    assert worker_count(0) >= 1
    monkeypatch.setenv(THREADS_ENV, "2")
    assert worker_count(8) == 2
    monkeypatch.setenv(THREADS_ENV, "none")
    assert worker_count(5) == 5


def test_parallel_map_keeps_order():
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert parallel_map(lambda x: x, [], workers=4) == []


def test_json_round_trip_through_a_file(tmp_path):
    path = str(tmp_path / "out" / "report.json")
    text = write_json({"value": "1/3"}, path)
    assert load_json(path) == {"value": "1/3"}
    assert '"1/3"' in text
    assert write_json([1]) == "[\n  1\n]"


def test_load_json_errors(tmp_path):
    with pytest.raises(InputFormatError):
        load_json(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("[1,")
    with pytest.raises(InputFormatError):
        load_json(str(broken))


def recording_reporter(verbose=True, log_level="info"):
    console = Console(record=True, width=120)
    return Reporter(verbose=verbose, log_level=log_level, console=console), console


def test_reporter_levels():
    quiet, console = recording_reporter(verbose=False)
    quiet.log("hidden", "info")
    quiet.log("shown", "error")
    text = console.export_text()
    assert "hidden" not in text
    assert "shown" in text

    loud, console = recording_reporter(log_level="warning")
    loud.log("detail", "info")
    loud.log("careful", "warning")
    text = console.export_text()
    assert "detail" not in text
    assert "careful" in text


def test_reporter_panel_and_table():
    reporter, console = recording_reporter()
    reporter.panel("Factorization", ["residual = 0"])
    reporter.table("Blocks", ["index", "level"], [("[0,1)", 0)])
    text = console.export_text()
    assert "residual = 0" in text
    assert "Blocks" in text


def test_trace_records_construction_steps():
    trace = ConstructionTrace()
    quasi_diagonalize(OperatorMatrix.identity(2), delta=1, eta=1, index_depth=1, trace=trace)
    counts = trace.get_stage_counts()
    assert counts["quasi_diag"] >= 3
    assert trace.get_recent(1)[0]["message"].startswith("done")
    copy = ConstructionTrace()
    copy.import_trace(trace.export_trace())
    assert copy.get_stage_counts() == counts


def test_trace_echoes_and_caps():
    reporter, console = recording_reporter()
    trace = ConstructionTrace(reporter=reporter, max_items=2)
    for i in range(3):
        note(trace, "factor", f"step {i}", "info", value=Fraction(i))
    trace.add_error("factor", "broken")
    assert [s["message"] for s in trace.steps] == ["step 1", "step 2"]
    assert trace.errors[0]["error"] == "broken"
    assert "[factor] broken" in console.export_text()
    note(None, "factor", "ignored")
    trace.clear()
    assert trace.get_recent() == []
