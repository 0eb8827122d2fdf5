"""In-memory plan cache with a fixed time-to-live."""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass
from typing import Callable

DEFAULT_TTL_S = 3600.0
TTL_ENV = "ORBITPLAN_CACHE_TTL"


@dataclass(frozen=True)
class CacheEntry:
    key: str
    plan: object
    expires_at: float


class PlanCache:
    def __init__(self, ttl: float | None = None, clock: Callable[[], float] = time.monotonic):
        if ttl is None:
            ttl = float(os.environ.get(TTL_ENV, DEFAULT_TTL_S))
        if ttl < 0:
            raise ValueError("cache TTL must be non-negative")
        self.ttl = ttl
        self._clock = clock
        self._entries: dict[str, CacheEntry] = {}
        self._lock = threading.Lock()

    def get(self, key: str):
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            if self._clock() >= entry.expires_at:
                del self._entries[key]
                return None
            return entry.plan

    def put(self, key: str, plan) -> CacheEntry:
        entry = CacheEntry(key, plan, self._clock() + self.ttl)
        with self._lock:
            self._entries[key] = entry
        return entry

    def remaining(self, key: str) -> float:
        with self._lock:
            entry = self._entries.get(key)
        return 0.0 if entry is None else max(0.0, entry.expires_at - self._clock())

    def __len__(self) -> int:
        now = self._clock()
        with self._lock:
            return sum(1 for e in self._entries.values() if e.expires_at > now)
