from datetime import datetime

import pytest

from wml.engine import cache as cache_module
from wml.engine.cache import ReportCache, get_cache


class _FrozenDatetime(datetime):
    @classmethod
    def now(cls, tz=None):
        return cls(2026, 10, 19, 11, 45, 1)


@pytest.fixture
def report_cache(tmp_path):
    return ReportCache(tmp_path / "reports")


def test_save_and_get(report_cache):
    report_id = report_cache.save({"slope": -1.0}, "sweep")
    assert report_id.startswith("sweep-")
    assert report_cache.get(report_id) == {"slope": -1.0}
    text = (report_cache.cache_dir / f"{report_id}.json").read_text(encoding="utf-8")
    assert text.endswith("\n")


def test_same_second_gets_suffix(report_cache, monkeypatch):
    monkeypatch.setattr(cache_module, "datetime", _FrozenDatetime)
    first = report_cache.save({"k": 1}, "simulate")
    second = report_cache.save({"k": 2}, "simulate")
    third = report_cache.save({"k": 3}, "simulate")
    assert first == "simulate-20261019-114501"
    assert second == "simulate-20261019-114501-2"
    assert third == "simulate-20261019-114501-3"
    assert report_cache.get(second) == {"k": 2}


def test_missing_report(report_cache):
    assert report_cache.get("sweep-19700101-000000") is None


def test_expired_entries_are_dropped(tmp_path):
    expired = ReportCache(tmp_path / "reports", max_age_hours=0)
    report_id = expired.save({"x": 1}, "sweep")
    assert expired.get(report_id) is None
    assert not (expired.cache_dir / f"{report_id}.json").exists()


def test_list_filters_by_type(report_cache):
    report_cache.save({}, "sweep")
    report_cache.save({}, "verify-lemmas")
    assert {e["type"] for e in report_cache.list_entries()} == {"sweep", "verify-lemmas"}
    only = report_cache.list_entries("sweep")
    assert len(only) == 1
    assert only[0]["age_seconds"] >= 0


def test_corrupt_entry_is_skipped(report_cache):
    (report_cache.cache_dir / "broken.json").write_text("{", encoding="utf-8")
    report_cache.save({}, "sweep")
    assert len(report_cache.list_entries()) == 1


def test_cleanup_and_clear(report_cache):
    report_cache.save({}, "sweep")
    report_cache.save({}, "simulate")
    assert report_cache.cleanup() == 0
    assert report_cache.clear() == 2
    assert report_cache.list_entries() == []


def test_get_cache_reuses_instance(tmp_path):
    assert get_cache(tmp_path) is get_cache(tmp_path)
