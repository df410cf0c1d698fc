"""Persistent concept-categorization cache.

Storage is a single append-only JSONL record log: ``put`` records carry
the categorization, ``hit`` records count lookups.  The log is replayed
on open and compacted to one record per live entry (atomic temp-file
rewrite), so the file stays crash-safe and diff-friendly.  A corrupt log
refuses to load rather than serving partial state.

Lookups key on the normalized concept form, so "Pleural Effusions" and
"pleural effusion" share an entry.  Writes serialize behind a lock;
reads see the latest complete snapshot without locking.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from radstruct.errors import CacheCorruptError
from radstruct.textproc import normalize_concept
from radstruct.util import Clock, atomic_write_text

RECORD_VERSION = 1


@dataclass(frozen=True)
class CacheEntry:
    key: str
    category_key: str
    primary_ontology_label: str
    created_at: float
    hit_count: int = 0

    def to_json_obj(self) -> dict:
        return {
            "key": self.key,
            "category_key": self.category_key,
            "primary_ontology_label": self.primary_ontology_label,
            "created_at": self.created_at,
            "hit_count": self.hit_count,
        }


class CacheStore:
    def __init__(self, path: str | Path, clock: Clock | None = None):
        self.path = Path(path)
        self._clock = clock or Clock()
        self._lock = threading.Lock()
        self._entries: dict[str, CacheEntry] = {}
        self._record_count = 0
        if self.path.exists():
            self._replay()
            self._compact()

    # -- log plumbing ------------------------------------------------------

    def _replay(self) -> None:
        entries: dict[str, CacheEntry] = {}
        count = 0
        try:
            text = self.path.read_text("utf-8")
        except OSError as exc:
            raise CacheCorruptError(f"cannot read cache log {self.path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            count += 1
            try:
                record = json.loads(line)
                if record.get("v") != RECORD_VERSION:
                    raise ValueError(f"unsupported record version {record.get('v')!r}")
                op = record["op"]
                if op == "put":
                    entries[record["key"]] = CacheEntry(
                        key=record["key"],
                        category_key=record["category_key"],
                        primary_ontology_label=record["primary_ontology_label"],
                        created_at=record["created_at"],
                        hit_count=record.get("hit_count", 0),
                    )
                elif op == "hit":
                    entry = entries[record["key"]]
                    entries[record["key"]] = replace(entry, hit_count=entry.hit_count + 1)
                else:
                    raise ValueError(f"unknown op {op!r}")
            except (ValueError, KeyError, TypeError) as exc:
                raise CacheCorruptError(
                    f"corrupt cache log {self.path} at line {lineno}: {exc}"
                ) from exc
        self._entries = entries
        self._record_count = count

    def _compact(self) -> None:
        lines = [
            json.dumps({"v": RECORD_VERSION, "op": "put", **entry.to_json_obj()}, ensure_ascii=False)
            for entry in self._entries.values()
        ]
        atomic_write_text(self.path, "\n".join(lines) + ("\n" if lines else ""))
        self._record_count = len(lines)

    def _append(self, record: dict) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps({"v": RECORD_VERSION, **record}, ensure_ascii=False) + "\n")
        self._record_count += 1

    # -- operations ---------------------------------------------------------

    def put(self, concept_text: str, category_key: str, primary_ontology_label: str) -> CacheEntry:
        """Insert or replace the entry for a concept; last write wins."""
        key = normalize_concept(concept_text)
        entry = CacheEntry(
            key=key,
            category_key=category_key,
            primary_ontology_label=primary_ontology_label,
            created_at=self._clock.now_unix(),
            hit_count=0,
        )
        with self._lock:
            new_entries = dict(self._entries)
            new_entries[key] = entry
            self._entries = new_entries
            self._append({"op": "put", **entry.to_json_obj()})
        return entry

    def check(self, concept_text: str) -> CacheEntry | None:
        """Lookup under key normalization; a hit bumps the counter."""
        key = normalize_concept(concept_text)
        if key not in self._entries:
            return None
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            entry = replace(entry, hit_count=entry.hit_count + 1)
            new_entries = dict(self._entries)
            new_entries[key] = entry
            self._entries = new_entries
            self._append({"op": "hit", "key": key})
        return entry

    def clear(self) -> None:
        with self._lock:
            self._entries = {}
            atomic_write_text(self.path, "")
            self._record_count = 0

    def entries(self) -> dict[str, CacheEntry]:
        return dict(self._entries)

    def stats(self) -> dict:
        entries = self._entries
        return {
            "path": str(self.path),
            "entries": len(entries),
            "total_hits": sum(e.hit_count for e in entries.values()),
        }
