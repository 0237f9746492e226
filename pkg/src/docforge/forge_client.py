"""Optional live metadata client for the GitHub REST API.

Off by default; the pipeline normally consumes metadata JSON Lines prepared
ahead of time. Requests are paced to stay under ``requests_per_hour``.
"""

from __future__ import annotations

import threading
import time
from typing import Any, Callable

import httpx

from .repo_filter import MetadataError, RepoMetadata, metadata_from_dict


class ForgeMetadataClient:
    def __init__(
        self,
        token: str | None = None,
        base_url: str = "https://api.github.com",
        requests_per_hour: int = 1000,
        client: httpx.Client | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        headers = {"Accept": "application/vnd.github+json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = client or httpx.Client(base_url=base_url, timeout=30.0)
        self._headers = headers
        self._interval = 3600.0 / requests_per_hour
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_slot = 0.0

    def _get(self, path: str) -> Any:
        with self._lock:
            now = self._clock()
            if now < self._next_slot:
                self._sleep(self._next_slot - now)
                now = self._next_slot
            self._next_slot = now + self._interval
        response = self._client.get(path, headers=self._headers)
        response.raise_for_status()
        return response.json()

    def fetch(self, full_name: str) -> RepoMetadata:
        """Metadata for ``owner/name``; raises MetadataError if fields are missing."""
        repo = self._get(f"/repos/{full_name}")
        languages = self._get(f"/repos/{full_name}/languages")
        total = sum(languages.values()) or 1
        license_info = repo.get("license") or {}
        record = {
            "repo_id": repo.get("full_name", full_name),
            "language_fractions": {k: v / total for k, v in languages.items()},
            "license_id": license_info.get("spdx_id"),
            "topics": repo.get("topics", []),
            "last_commit": repo.get("pushed_at"),
            "is_fork": repo.get("fork"),
            # The REST API has no documentation-language field; I1 stays unchecked.
            "primary_natural_language": None,
        }
        meta = metadata_from_dict(record)
        if isinstance(meta, list):
            raise MetadataError(f"{full_name}: missing fields {meta}")
        return meta
