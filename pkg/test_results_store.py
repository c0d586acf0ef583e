"""
Tests cho run ledger (SQLite).
"""

from src.services.results_store import get_run, list_runs, log_run


def test_log_and_list_runs(tmp_db):
    first = log_run("size", {"sizes": [2, 3]}, csv_path="output/size.csv", n_rows=2)
    second = log_run("disorder", {"samples": 10}, csv_path="output/disorder.csv", seed=7, n_rows=10, n_failed=1)
    assert first is not None and second is not None and second > first

    runs = list_runs()
    assert [r["id"] for r in runs] == [second, first]
    assert runs[0]["params"] == {"samples": 10}
    assert runs[0]["seed"] == 7
    assert runs[0]["n_failed"] == 1

    only_size = list_runs(kind="size")
    assert len(only_size) == 1 and only_size[0]["csv_path"] == "output/size.csv"
    assert len(list_runs(limit=1)) == 1


def test_get_run(tmp_db):
    run_id = log_run("temperature", {"temperatures": [0.5, 1.0]})
    run = get_run(run_id)
    assert run["kind"] == "temperature"
    assert run["params"]["temperatures"] == [0.5, 1.0]
    assert get_run(run_id + 100) is None


def test_explicit_db_path(tmp_path):
    path = str(tmp_path / "other.sqlite")
    run_id = log_run("size", {}, db_path=path)
    assert list_runs(db_path=path)[0]["id"] == run_id


def test_empty_ledger(tmp_db):
    assert list_runs() == []
