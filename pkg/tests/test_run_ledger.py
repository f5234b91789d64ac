"""Тести SQLite журналу прогонів."""

from __future__ import annotations

import pytest

from run_ledger import RunLedger


@pytest.fixture
def ledger(tmp_path):
    with RunLedger(tmp_path / "nested" / "runs.db") as db:
        yield db


def test_start_and_complete(ledger):
    run_id = ledger.start_run("chaos", "abc", 3, "results/chaos_seed3", "configs/chaos.json")
    rec = ledger.get_run(run_id)
    assert rec.status == "new"
    assert rec.summary == {}
    assert rec.config_path == "configs/chaos.json"

    ledger.mark_completed(run_id, {"mean_w1": {"100": 0.25}})
    rec = ledger.get_run(run_id)
    assert rec.status == "completed"
    assert rec.summary == {"mean_w1": {"100": 0.25}}
    assert rec.errors is None


def test_mark_failed_keeps_error(ledger):
    run_id = ledger.start_run("equilibrium", "def", 0, "out")
    ledger.mark_failed(run_id, "ValueError: немає стаціонарної родини")
    rec = ledger.get_run(run_id)
    assert rec.status == "failed"
    assert "стаціонарної" in rec.errors
    assert rec.config_path is None


def test_list_runs_newest_first(ledger):
    ids = [ledger.start_run(name, "h", k, f"out{k}") for k, name in enumerate(["chaos", "contraction", "chaos"])]
    assert [r.id for r in ledger.list_runs()] == ids[::-1]
    assert [r.id for r in ledger.list_runs(limit=2)] == ids[:0:-1]
    assert [r.seed for r in ledger.list_runs(scenario="chaos")] == [2, 0]
    assert ledger.get_run(999) is None


def test_summary_counts_statuses(ledger):
    a = ledger.start_run("chaos", "h", 0, "a")
    b = ledger.start_run("chaos", "h", 1, "b")
    ledger.start_run("chaos", "h", 2, "c")
    ledger.mark_completed(a)
    ledger.mark_failed(b, "boom")
    assert ledger.summary() == {"new": 1, "completed": 1, "failed": 1}


def test_ledger_persists_between_connections(tmp_path):
    path = tmp_path / "runs.db"
    with RunLedger(path) as db:
        run_id = db.start_run("dissipation", "h", 0, "out")
        db.mark_completed(run_id, {"rel_err": 0.01})
    with RunLedger(path) as db:
        assert db.get_run(run_id).summary == {"rel_err": 0.01}
