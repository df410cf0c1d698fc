"""Small shared helpers: clocks, atomic writes, whitespace normalization."""

from __future__ import annotations

import json
import os
import tempfile
import time
from pathlib import Path
from typing import Any


def collapse_whitespace(text: str) -> str:
    """Collapse runs of whitespace to single spaces and strip the ends."""
    return " ".join(text.split())


class Clock:
    """Wall-clock time source, millisecond resolution."""

    def monotonic_ms(self) -> int:
        return time.monotonic_ns() // 1_000_000

    def now_unix(self) -> float:
        return time.time()


class DeterministicClock(Clock):
    """Clock that advances by a fixed step per reading.

    Used in stub-engine runs so exported traces, durations included, are
    byte-identical across runs.
    """

    def __init__(self, step_ms: int = 1, start_ms: int = 0):
        self._now = start_ms
        self._step = step_ms

    def monotonic_ms(self) -> int:
        value = self._now
        self._now += self._step
        return value

    def now_unix(self) -> float:
        return self.monotonic_ms() / 1000.0


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file via temp-and-rename so readers never see a torn write."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_json(path: str | Path, obj: Any, indent: int = 2) -> None:
    atomic_write_text(path, json.dumps(obj, ensure_ascii=False, indent=indent) + "\n")
