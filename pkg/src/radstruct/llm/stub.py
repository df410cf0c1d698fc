"""Deterministic rule-based engine for offline runs and tests.

The stub answers the same prompts the remote engine would: it reads the
role tag and the fenced context JSON that every template embeds, then
produces its reply from a fixed lexicon (term, category, primary ontology
label, extra polarity cues).  Identical prompt in, identical text out.

Replies are wrapped in reasoning tags followed by the JSON payload so the
downstream reasoning-stripping path is exercised on every call.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from radstruct.errors import StubUnsupportedError
from radstruct.protocol import EMPTY_SECTION_MARKER
from radstruct.textproc import (
    POLARITY_ABSENT,
    POLARITY_UNCERTAIN,
    contains_tokens,
    detect_polarity,
    normalize_concept,
    split_sentences,
)

_ROLE_LINE = re.compile(r"^### task:\s*(\w+)", re.MULTILINE)
_CONTEXT_BLOCK = re.compile(r"### context\s*```json\n(.*?)\n```", re.DOTALL)

# Default ancestor labels marking a hit as the principal finding when the
# lexicon gives no verdict; configurable through the filter tool.
DEFAULT_PRIMARY_ROOTS = ("clinical finding", "disease", "physical object", "procedure")


@dataclass(frozen=True)
class LexiconEntry:
    term: str
    normalized: str
    category_key: str
    primary_ontology_label: str
    polarity_cues: tuple[str, ...] = ()


class StubLexicon:
    """Term table driving every stub behavior."""

    def __init__(self, entries: list[LexiconEntry]):
        self.entries = list(entries)
        self._by_normalized = {e.normalized: e for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, normalized: str) -> LexiconEntry | None:
        return self._by_normalized.get(normalized)

    def best_overlap(self, normalized: str) -> LexiconEntry | None:
        """Entry sharing the most tokens with the query, None if disjoint.

        Ties prefer the entry with more of its own tokens covered, then
        the lexicographically smaller term.
        """
        query_tokens = set(normalized.split())
        scored = []
        for entry in self.entries:
            entry_tokens = entry.normalized.split()
            overlap = sum(1 for tok in set(entry_tokens) if tok in query_tokens)
            if overlap:
                scored.append((-overlap, -overlap / len(entry_tokens), entry.term, entry))
        if not scored:
            return None
        return min(scored)[3]

    @classmethod
    def from_json_obj(cls, obj: dict) -> "StubLexicon":
        entries = [
            LexiconEntry(
                term=rec["term"],
                normalized=normalize_concept(rec["term"]),
                category_key=rec["category_key"],
                primary_ontology_label=rec.get("primary_ontology_label", ""),
                polarity_cues=tuple(rec.get("polarity_cues", ())),
            )
            for rec in obj["terms"]
        ]
        return cls(entries)

    @classmethod
    def load_file(cls, path: str | Path) -> "StubLexicon":
        return cls.from_json_obj(json.loads(Path(path).read_text("utf-8")))

    @classmethod
    def load_bundled(cls) -> "StubLexicon":
        text = resources.files("radstruct.data").joinpath("stub_lexicon.json").read_text("utf-8")
        return cls.from_json_obj(json.loads(text))


class StubEngine:
    """Lexicon-driven ChatEngine; see module docstring."""

    def __init__(self, lexicon: StubLexicon | None = None):
        self.lexicon = lexicon or StubLexicon.load_bundled()

    def chat(self, messages: list[dict[str, str]]) -> str:
        prompt = messages[-1]["content"] if messages else ""
        role_match = _ROLE_LINE.search(prompt)
        context_match = _CONTEXT_BLOCK.search(prompt)
        if role_match is None:
            raise StubUnsupportedError("prompt carries no role tag")
        role = role_match.group(1)
        context = json.loads(context_match.group(1)) if context_match else {}
        handler = getattr(self, f"_play_{role}", None)
        if handler is None:
            raise StubUnsupportedError(f"stub cannot play role {role!r}")
        thought, payload = handler(context)
        return f"<think>{thought}</think>\n{json.dumps(payload, ensure_ascii=False)}"

    # -- extract ---------------------------------------------------------

    def _play_extract(self, context: dict) -> tuple[str, dict]:
        report_text = context.get("report_text", "")
        sentences = split_sentences(report_text)
        found: list[dict] = []
        seen: set[str] = set()
        hits: list[tuple[int, int, str, str]] = []
        for s_index, sentence in enumerate(sentences):
            sentence_tokens = normalize_concept(sentence).split()
            for entry in self.lexicon.entries:
                position = contains_tokens(sentence_tokens, entry.normalized.split())
                if position >= 0:
                    hits.append((s_index, position, entry.term, sentence))
        hits.sort(key=lambda h: (h[0], h[1], h[2]))
        for _, _, term, sentence in hits:
            entry = self.lexicon.lookup(normalize_concept(term))
            if entry.normalized in seen:
                continue
            seen.add(entry.normalized)
            found.append(
                {
                    "text": entry.term,
                    "source_sentence": sentence,
                    "polarity": detect_polarity(sentence, extra_cues=entry.polarity_cues),
                }
            )
        return f"matched {len(found)} lexicon terms", {"concepts": found}

    # -- categorize ------------------------------------------------------

    def _play_categorize(self, context: dict) -> tuple[str, dict]:
        protocol_keys = [c["key"] for c in context.get("protocol", {}).get("categories", [])]
        fallback = protocol_keys[0] if protocol_keys else "A"
        out = []
        for concept in context.get("concepts", []):
            normalized = concept.get("normalized") or normalize_concept(concept.get("text", ""))
            entry = self.lexicon.lookup(normalized) or self.lexicon.best_overlap(normalized)
            if entry is not None:
                out.append(
                    {
                        "category_key": entry.category_key,
                        "rationale": f"lexicon maps {entry.term!r} to section {entry.category_key}",
                    }
                )
            else:
                out.append(
                    {
                        "category_key": fallback,
                        "rationale": "term not in lexicon; defaulted to first protocol section",
                    }
                )
        return f"categorized {len(out)} concepts", {"categorized": out}

    # -- filter ----------------------------------------------------------

    def _play_filter(self, context: dict) -> tuple[str, dict]:
        primary_roots = tuple(
            r.lower() for r in context.get("primary_roots", DEFAULT_PRIMARY_ROOTS)
        )
        filtered = []
        for item in context.get("items", []):
            concept = item.get("concept", {})
            hits = item.get("hits", [])
            primary = self._pick_primary(concept, hits, primary_roots)
            secondary = [i for i in range(len(hits)) if i != primary]
            filtered.append({"primary_index": primary, "secondary_indices": secondary})
        return f"filtered {len(filtered)} mapping sets", {"filtered": filtered}

    def _pick_primary(self, concept: dict, hits: list[dict], primary_roots: tuple[str, ...]) -> int | None:
        if not hits:
            return None
        normalized = concept.get("normalized") or normalize_concept(concept.get("text", ""))
        entry = self.lexicon.lookup(normalized)
        if entry is not None and entry.primary_ontology_label:
            for i, hit in enumerate(hits):
                if hit.get("preferred_label") == entry.primary_ontology_label:
                    return i
        # ancestor-chain heuristic: a principal finding descends from a
        # disorder/finding root; break ties by longest matched span, then
        # lexicographically smallest class id.
        candidates = []
        for i, hit in enumerate(hits):
            ancestor_labels = [str(label).lower() for _, label in hit.get("ancestors", [])]
            if any(root in label for label in ancestor_labels for root in primary_roots):
                span = hit.get("match_span", [0, 0])
                candidates.append((-(span[1] - span[0]), str(hit.get("class_id", "")), i))
        if not candidates:
            return None
        return min(candidates)[2]

    # -- generate --------------------------------------------------------

    def _play_generate(self, context: dict) -> tuple[str, dict]:
        protocol = context.get("protocol", {})
        marker = context.get("empty_marker", EMPTY_SECTION_MARKER)
        sections = []
        for category in protocol.get("categories", []):
            findings = []
            for item in context.get("categorized", []):
                if item.get("category_key") != category["key"]:
                    continue
                concept = item.get("concept", {})
                findings.append(
                    {
                        "text": self._finding_text(concept),
                        "concepts": [concept.get("normalized", "")],
                        "source_sentences": [concept.get("source_sentence", "")],
                    }
                )
            sections.append(
                {
                    "key": category["key"],
                    "title": category["title"],
                    "findings": findings,
                    "empty_marker": None if findings else marker,
                }
            )
        report = {"protocol_name": protocol.get("name", ""), "sections": sections}
        return f"rendered {len(sections)} sections", {"report": report}

    @staticmethod
    def _finding_text(concept: dict) -> str:
        text = concept.get("text", "")
        polarity = concept.get("polarity", "present")
        if polarity == POLARITY_ABSENT:
            return f"No {text}."
        if polarity == POLARITY_UNCERTAIN:
            return f"Possible {text}."
        return f"{text[:1].upper()}{text[1:]}."

    # -- plan / observe ---------------------------------------------------

    def _play_plan(self, context: dict) -> tuple[str, dict]:
        decision = plan_canonical_step(context)
        return "followed canonical tool order", decision

    def _play_observe(self, context: dict) -> tuple[str, dict]:
        task_kind = context.get("task_kind", "")
        last = context.get("last_result", {})
        expected = context.get("n_input_concepts")
        if last.get("ok"):
            payload = last.get("payload", {})
            if task_kind.endswith("_to_report") and last.get("tool") == "generate_report":
                return "goal reached", {
                    "verdict": "terminate",
                    "justification": "structured report produced and validated",
                }
            if (
                task_kind.endswith("_to_concepts")
                and last.get("tool") == "categorize_concepts"
                and expected is not None
                and len(payload.get("categorized", [])) == expected
            ):
                return "goal reached", {
                    "verdict": "terminate",
                    "justification": "every input concept categorized",
                }
        return "pipeline incomplete", {
            "verdict": "continue",
            "justification": "latest result is not the requested final artifact",
        }


def _history_payloads(context: dict) -> dict[str, list[dict]]:
    """Successful payloads per tool name, in execution order."""
    by_tool: dict[str, list[dict]] = {}
    for step in context.get("history", []):
        if step.get("ok"):
            by_tool.setdefault(step["tool"], []).append(step.get("payload", {}))
    return by_tool


def _raw_concepts_to_objects(raw: list) -> list[dict]:
    """Concept objects for raw term input; the term itself is the source."""
    concepts = []
    for item in raw:
        text = item if isinstance(item, str) else item.get("text", "")
        concepts.append(
            {
                "text": text,
                "normalized": normalize_concept(text),
                "source_sentence": text,
                "polarity": detect_polarity(text),
            }
        )
    return concepts


def plan_canonical_step(context: dict) -> dict:
    """Next action under the canonical tool order for each task kind.

    Report tasks start with extraction; concept tasks start from the raw
    term list.  With caching on, each concept is looked up first and only
    the misses travel through mapping, filtering, and categorization.
    """
    task_kind = context.get("task_kind", "report_to_report")
    cache_enabled = bool(context.get("cache_enabled"))
    protocol_name = context.get("protocol", {}).get("name", "")
    history = _history_payloads(context)
    to_report = task_kind.endswith("_to_report")

    def call(tool: str, params: dict) -> dict:
        return {"action": "call", "tool": tool, "params": params}

    # establish the concept list
    if task_kind.startswith("report_"):
        if "get_concept" not in history:
            return call("get_concept", {"report_text": context.get("payload", "")})
        concepts = history["get_concept"][-1].get("concepts", [])
    else:
        concepts = _raw_concepts_to_objects(context.get("payload", []))

    generated = history.get("generate_report")
    if generated:
        return {"action": "final", "output": generated[-1].get("report")}

    if not concepts:
        if to_report:
            return call("generate_report", {"categorized": [], "protocol": protocol_name})
        return {"action": "final", "output": {"categorized": []}}

    cached: dict[str, dict] = {}
    pending = list(concepts)
    if cache_enabled:
        checked: dict[str, dict] = {}
        for payload in history.get("check_cache", []):
            checked[payload.get("key", "")] = payload
        for concept in concepts:
            if concept["normalized"] not in checked:
                return call("check_cache", {"concept": concept["normalized"]})
        for concept in concepts:
            outcome = checked[concept["normalized"]]
            if outcome.get("hit"):
                entry = outcome.get("entry", {})
                cached[concept["normalized"]] = {
                    "concept": concept,
                    "category_key": entry.get("category_key"),
                    "rationale": "cache hit",
                    "primary_ontology_id": None,
                }
        pending = [c for c in concepts if c["normalized"] not in cached]

    categorized_fresh: list[dict] = []
    if pending:
        if "map_ontology" not in history:
            return call("map_ontology", {"concepts": pending})
        mapping_sets = history["map_ontology"][-1].get("mapping_sets", [])
        if "filter_ontology" not in history:
            return call("filter_ontology", {"items": mapping_sets})
        filtered = history["filter_ontology"][-1].get("filtered", [])
        if "categorize_concepts" not in history:
            return call(
                "categorize_concepts",
                {
                    "concepts": pending,
                    "filtered": filtered,
                    "protocol": protocol_name,
                    "update_cache": cache_enabled,
                },
            )
        categorized_fresh = history["categorize_concepts"][-1].get("categorized", [])

    # merge cache hits and fresh categorizations back into input order
    fresh_by_key = {item["concept"]["normalized"]: item for item in categorized_fresh}
    merged = []
    for concept in concepts:
        key = concept["normalized"]
        if key in cached:
            merged.append(cached[key])
        elif key in fresh_by_key:
            merged.append(fresh_by_key[key])
    if to_report:
        return call("generate_report", {"categorized": merged, "protocol": protocol_name})
    return {"action": "final", "output": {"categorized": merged}}
