"""
Report cache for progressive disclosure.

Commands print a one-line summary with a report ID; the full report is kept
here and retrieved with --get-report ID.

Cache directory: ~/.wml-bench/reports/
Expiration: 7 days by default
"""

import json
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any


class ReportCache:
    """
    Store full command reports under timestamped IDs.

    IDs look like 'sweep-20261019-114501'; a numeric suffix is appended when
    two reports of the same type land in the same second.
    """

    def __init__(self, cache_dir: Path | None = None, max_age_hours: int = 24 * 7):
        """
        Initialize cache.

        Args:
            cache_dir: Cache directory (default: ~/.wml-bench/reports/)
            max_age_hours: Age after which entries expire
        """
        if cache_dir is None:
            cache_dir = Path("~/.wml-bench/reports").expanduser()
        self.cache_dir = Path(cache_dir)
        self.max_age_hours = max_age_hours
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def save(self, data: dict[str, Any], report_type: str) -> str:
        """
        Save a report and return its ID.

        Args:
            data: JSON-serializable report
            report_type: Command name ('simulate', 'sweep', 'verify-lemmas', ...)

        Returns:
            Report ID like 'sweep-20261019-114501'
        """
        timestamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        base_id = f"{report_type}-{timestamp}"
        report_id = base_id
        suffix = 2
        while (self.cache_dir / f"{report_id}.json").exists():
            report_id = f"{base_id}-{suffix}"
            suffix += 1

        entry = {
            "report_id": report_id,
            "report_type": report_type,
            "created_at": datetime.now().isoformat(),
            "data": data,
        }
        with open(self.cache_dir / f"{report_id}.json", "w", encoding="utf-8") as f:
            json.dump(entry, f, indent=2, sort_keys=True)
            f.write("\n")
        return report_id

    def get(self, report_id: str) -> dict[str, Any] | None:
        """
        Retrieve a report by ID.

        Returns:
            Report data, or None if missing or expired
        """
        cache_file = self.cache_dir / f"{report_id}.json"
        if not cache_file.exists():
            return None
        if self._is_expired(cache_file):
            cache_file.unlink()
            return None
        try:
            with open(cache_file, encoding="utf-8") as f:
                return json.load(f).get("data")
        except (OSError, json.JSONDecodeError):
            return None

    def list_entries(self, report_type: str | None = None) -> list[dict[str, Any]]:
        """
        List cached reports, newest first.

        Args:
            report_type: Filter by command name, or None for all

        Returns:
            Entries with id, type, created_at and age_seconds
        """
        entries = []
        for cache_file in sorted(self.cache_dir.glob("*.json"), reverse=True):
            if self._is_expired(cache_file):
                cache_file.unlink()
                continue
            try:
                with open(cache_file, encoding="utf-8") as f:
                    entry = json.load(f)
                if report_type and entry.get("report_type") != report_type:
                    continue
                created_at = datetime.fromisoformat(entry.get("created_at", ""))
                entries.append(
                    {
                        "id": entry.get("report_id"),
                        "type": entry.get("report_type"),
                        "created_at": entry.get("created_at"),
                        "age_seconds": int((datetime.now() - created_at).total_seconds()),
                    }
                )
            except (OSError, json.JSONDecodeError, ValueError):
                continue
        return entries

    def cleanup(self, max_age_hours: int | None = None) -> int:
        """Remove expired entries and return how many were deleted."""
        deleted = 0
        for cache_file in self.cache_dir.glob("*.json"):
            if self._is_expired(cache_file, max_age_hours):
                cache_file.unlink()
                deleted += 1
        return deleted

    def clear(self) -> int:
        """Remove every entry."""
        deleted = 0
        for cache_file in self.cache_dir.glob("*.json"):
            cache_file.unlink()
            deleted += 1
        return deleted

    def _is_expired(self, cache_file: Path, max_age_hours: int | None = None) -> bool:
        if max_age_hours is None:
            max_age_hours = self.max_age_hours
        try:
            with open(cache_file, encoding="utf-8") as f:
                created_at = datetime.fromisoformat(json.load(f).get("created_at", ""))
            return datetime.now() - created_at > timedelta(hours=max_age_hours)
        except (OSError, json.JSONDecodeError, ValueError):
            return True


_cache_instances: dict[str, ReportCache] = {}


def get_cache(cache_dir: Path | None = None) -> ReportCache:
    """Get or create the cache instance for a directory."""
    key = str(cache_dir) if cache_dir else "default"
    if key not in _cache_instances:
        _cache_instances[key] = ReportCache(cache_dir)
    return _cache_instances[key]
