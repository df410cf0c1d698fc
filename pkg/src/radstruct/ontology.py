"""Client for an ontology annotator service with fixture and remote backends.

The fixture backend serves a checked-in snapshot keyed by normalized term,
so tests and offline runs never touch the network.  The remote backend
speaks a BioPortal-style annotator API; its response translation is
isolated in one function so upstream API churn touches one place.

Either way, results flow through a response cache keyed by
(normalized text, ontology set), with duplicate concurrent misses
coalesced into a single backend call.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol

import requests

from radstruct.errors import AnnotatorUnavailableError, ConfigError
from radstruct.textproc import normalize_concept
from radstruct.util import atomic_write_text

logger = logging.getLogger(__name__)

DEFAULT_ONTOLOGIES = ("SNOMEDCT", "RADLEX")


class OntologyClassNotFound(KeyError):
    """Requested class id has never been seen by this client."""


@dataclass(frozen=True)
class AnnotatorHit:
    """One ontology match: class, span into the query, chain to the root."""

    ontology: str
    class_id: str
    preferred_label: str
    match_span: tuple[int, int]
    ancestors: tuple[tuple[str, str], ...]  # (class_id, label), parent -> root

    def __post_init__(self):
        ids = [cid for cid, _ in self.ancestors]
        if len(ids) != len(set(ids)) or self.class_id in ids:
            raise ValueError(f"ancestor chain of {self.class_id} contains a cycle")
        start, end = self.match_span
        if start < 0 or end < start:
            raise ValueError(f"invalid match span {self.match_span}")

    def to_json_obj(self) -> dict:
        return {
            "ontology": self.ontology,
            "class_id": self.class_id,
            "preferred_label": self.preferred_label,
            "match_span": list(self.match_span),
            "ancestors": [list(a) for a in self.ancestors],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AnnotatorHit":
        return cls(
            ontology=obj["ontology"],
            class_id=obj["class_id"],
            preferred_label=obj["preferred_label"],
            match_span=tuple(obj["match_span"]),
            ancestors=tuple((a[0], a[1]) for a in obj.get("ancestors", ())),
        )


class AnnotatorBackend(Protocol):
    def annotate(self, text: str, ontologies: tuple[str, ...]) -> list[AnnotatorHit]: ...


class FixtureBackend:
    """Exact-match lookup in a local snapshot of annotator responses."""

    def __init__(self, terms: dict[str, list[AnnotatorHit]]):
        self.terms = terms

    def annotate(self, text: str, ontologies: tuple[str, ...]) -> list[AnnotatorHit]:
        hits = self.terms.get(text, [])
        return [h for h in hits if h.ontology in ontologies]

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FixtureBackend":
        terms: dict[str, list[AnnotatorHit]] = {}
        for term, raw_hits in obj.get("terms", {}).items():
            try:
                hits = [AnnotatorHit.from_json_obj(h) for h in raw_hits]
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"bad ontology fixture entry {term!r}: {exc}") from exc
            for hit in hits:
                if hit.match_span[1] > len(term):
                    raise ConfigError(
                        f"fixture entry {term!r}: span {hit.match_span} outside query bounds"
                    )
            terms[term] = hits
        return cls(terms)

    @classmethod
    def load_file(cls, path: str | Path) -> "FixtureBackend":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"ontology fixture not found: {path}")
        return cls.from_json_obj(json.loads(path.read_text("utf-8")))

    @classmethod
    def load_bundled(cls) -> "FixtureBackend":
        text = resources.files("radstruct.data").joinpath("ontology_fixture.json").read_text("utf-8")
        return cls.from_json_obj(json.loads(text))


def translate_annotator_payload(payload: list[dict]) -> list[AnnotatorHit]:
    """Convert the annotator service's native response into hits.

    Expected item shape: ``annotatedClass`` with an ``@id`` URI whose tail
    is the class id and whose path names the ontology, ``prefLabel``,
    1-based inclusive ``annotations[].from/to`` spans, and a ``hierarchy``
    list ordered here by ``distance`` (1 = direct parent).
    """
    hits = []
    for item in payload:
        annotated = item.get("annotatedClass", {})
        uri = annotated.get("@id", "")
        parts = [p for p in uri.split("/") if p]
        class_id = parts[-1] if parts else ""
        ontology = parts[-2] if len(parts) >= 2 else ""
        chain = sorted(item.get("hierarchy", []), key=lambda h: h.get("distance", 0))
        ancestors = tuple(
            (
                [p for p in h.get("annotatedClass", {}).get("@id", "").split("/") if p][-1],
                h.get("annotatedClass", {}).get("prefLabel", ""),
            )
            for h in chain
        )
        for annotation in item.get("annotations", [{}]):
            start = int(annotation.get("from", 1)) - 1
            end = int(annotation.get("to", start))
            hits.append(
                AnnotatorHit(
                    ontology=ontology,
                    class_id=class_id,
                    preferred_label=annotated.get("prefLabel", class_id),
                    match_span=(start, end),
                    ancestors=ancestors,
                )
            )
    return hits


class RemoteBackend:
    """HTTP annotator client; the API key rides a query parameter."""

    def __init__(
        self,
        annotator_url: str,
        api_key_env: str = "BIOPORTAL_API_KEY",
        session: requests.Session | None = None,
        max_attempts: int = 3,
        backoff_s: float = 0.5,
        sleep=time.sleep,
    ):
        self.annotator_url = annotator_url
        self.api_key_env = api_key_env
        self._session = session or requests.Session()
        self._max_attempts = max_attempts
        self._backoff_s = backoff_s
        self._sleep = sleep

    def annotate(self, text: str, ontologies: tuple[str, ...]) -> list[AnnotatorHit]:
        params = {
            "text": text,
            "ontologies": ",".join(ontologies),
            "longest_only": "false",
            "apikey": os.environ.get(self.api_key_env, ""),
        }
        last_error: Exception | None = None
        for attempt in range(self._max_attempts):
            if attempt:
                self._sleep(self._backoff_s * 2 ** (attempt - 1))
            try:
                response = self._session.get(self.annotator_url, params=params, timeout=60)
                response.raise_for_status()
                return translate_annotator_payload(response.json())
            except (requests.RequestException, ValueError, KeyError) as exc:
                last_error = exc
                logger.warning("annotator attempt %d failed: %s", attempt + 1, exc)
        raise AnnotatorUnavailableError(
            f"annotator unreachable after {self._max_attempts} attempts: {last_error}"
        )


class OntologyClient:
    """Caching front end over an annotator backend.

    Cache keys are (normalized text, ontology set); results persist to
    ``cache_path`` when configured.  ``ancestors`` answers from every hit
    this client has seen, including the interior of ancestor chains.
    """

    def __init__(
        self,
        backend: AnnotatorBackend,
        ontologies: tuple[str, ...] = DEFAULT_ONTOLOGIES,
        cache_path: str | Path | None = None,
    ):
        self.backend = backend
        self.ontologies = tuple(ontologies)
        self.cache_path = Path(cache_path) if cache_path else None
        self._cache: dict[str, list[AnnotatorHit]] = {}
        self._class_index: dict[str, tuple[tuple[str, str], ...]] = {}
        self._lock = threading.Lock()
        self._inflight: dict[str, threading.Event] = {}
        self.backend_calls = 0
        self.cache_hits = 0
        if self.cache_path and self.cache_path.exists():
            self._load_cache_file()

    @staticmethod
    def _key(normalized: str, ontologies: tuple[str, ...]) -> str:
        return f"{','.join(sorted(ontologies))}|{normalized}"

    def annotate(self, text: str, ontologies: tuple[str, ...] | None = None) -> list[AnnotatorHit]:
        """All annotator hits for a term, served from cache when possible."""
        selected = tuple(ontologies) if ontologies else self.ontologies
        unknown = set(selected) - set(DEFAULT_ONTOLOGIES)
        if unknown:
            raise ConfigError(f"unconfigured ontologies requested: {sorted(unknown)}")
        normalized = normalize_concept(text)
        key = self._key(normalized, selected)

        while True:
            with self._lock:
                if key in self._cache:
                    self.cache_hits += 1
                    return list(self._cache[key])
                waiter = self._inflight.get(key)
                if waiter is None:
                    self._inflight[key] = threading.Event()
                    break
            waiter.wait()

        try:
            hits = self.backend.annotate(normalized, selected)
            with self._lock:
                self.backend_calls += 1
                self._cache[key] = list(hits)
                for hit in hits:
                    self._index_hit(hit)
            if self.cache_path:
                self._save_cache_file()
            return list(hits)
        finally:
            with self._lock:
                event = self._inflight.pop(key, None)
            if event is not None:
                event.set()

    def _index_hit(self, hit: AnnotatorHit) -> None:
        self._class_index.setdefault(hit.class_id, hit.ancestors)
        for i, (ancestor_id, _) in enumerate(hit.ancestors):
            self._class_index.setdefault(ancestor_id, hit.ancestors[i + 1 :])

    def ancestors(self, class_id: str) -> tuple[tuple[str, str], ...]:
        """Chain parent -> root for a previously seen class; roots give ()."""
        with self._lock:
            if class_id not in self._class_index:
                raise OntologyClassNotFound(f"NOT_FOUND: unknown class id {class_id!r}")
            return self._class_index[class_id]

    def _save_cache_file(self) -> None:
        with self._lock:
            obj = {key: [h.to_json_obj() for h in hits] for key, hits in self._cache.items()}
        atomic_write_text(self.cache_path, json.dumps(obj, ensure_ascii=False, indent=1) + "\n")

    def _load_cache_file(self) -> None:
        try:
            obj = json.loads(self.cache_path.read_text("utf-8"))
            for key, raw_hits in obj.items():
                hits = [AnnotatorHit.from_json_obj(h) for h in raw_hits]
                self._cache[key] = hits
                for hit in hits:
                    self._index_hit(hit)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"corrupt ontology cache file {self.cache_path}: {exc}") from exc
