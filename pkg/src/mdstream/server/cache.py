"""Bounded LRU cache for encoded frame payloads.

Byte-accounted: total cached payload size never exceeds capacity_bytes,
whatever the mix of frame sizes. Safe for concurrent get/put; an optional
accounting hook observes every size change (tests assert the bound holds
at each step).
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import Callable, Hashable


class FrameCache:
    def __init__(self, capacity_bytes: int,
                 on_size_change: Callable[[int], None] | None = None):
        if capacity_bytes < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity_bytes = capacity_bytes
        self._entries: OrderedDict[Hashable, bytes] = OrderedDict()
        self._size = 0
        self._lock = threading.Lock()
        self._hits = 0
        self._misses = 0
        self._peak = 0
        self._on_size_change = on_size_change

    def _account(self) -> None:
        if self._size > self._peak:
            self._peak = self._size
        if self._on_size_change is not None:
            self._on_size_change(self._size)

    def get(self, key: Hashable) -> bytes | None:
        with self._lock:
            payload = self._entries.get(key)
            if payload is None:
                self._misses += 1
                return None
            self._entries.move_to_end(key)
            self._hits += 1
            return payload

    def put(self, key: Hashable, payload: bytes) -> bool:
        """Insert; returns False when the payload alone exceeds capacity."""
        size = len(payload)
        with self._lock:
            old = self._entries.pop(key, None)
            if old is not None:
                self._size -= len(old)
            if size > self.capacity_bytes:
                self._account()
                return False
            while self._size + size > self.capacity_bytes:
                _, evicted = self._entries.popitem(last=False)
                self._size -= len(evicted)
                self._account()
            self._entries[key] = payload
            self._size += size
            self._account()
            return True

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._size = 0
            self._account()

    @property
    def size_bytes(self) -> int:
        return self._size

    @property
    def peak_bytes(self) -> int:
        return self._peak

    def stats(self) -> dict:
        with self._lock:
            return {
                "entries": len(self._entries),
                "size_bytes": self._size,
                "peak_bytes": self._peak,
                "capacity_bytes": self.capacity_bytes,
                "hits": self._hits,
                "misses": self._misses,
            }
