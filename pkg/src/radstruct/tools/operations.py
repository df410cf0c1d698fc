"""The engine-backed pipeline operations behind the six tools.

Each operation renders its role template with a JSON context block, runs
the configured engine through the schema-checked completion loop, then
enforces the semantic contract the schema alone cannot express (partition
totality, category validity, report validity/grounding) with one
corrective re-ask before failing.
"""

from __future__ import annotations

from typing import Any

from radstruct.errors import TOOL_ERROR
from radstruct.llm.base import ChatEngine, complete
from radstruct.llm.templates import TemplateLibrary, render_with_context
from radstruct.mcp.server import ToolFailure
from radstruct.ontology import OntologyClient
from radstruct.protocol import (
    MedicalConcept,
    ProtocolSchema,
    StructuredReport,
    validate_structured_report,
)
from radstruct.util import collapse_whitespace

EXTRACT_SCHEMA = {
    "type": "object",
    "properties": {
        "concepts": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "source_sentence": {"type": "string"},
                    "polarity": {"enum": ["present", "absent", "uncertain"]},
                },
                "required": ["text", "source_sentence"],
            },
        }
    },
    "required": ["concepts"],
}

FILTER_SCHEMA = {
    "type": "object",
    "properties": {
        "filtered": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "primary_index": {"type": ["integer", "null"]},
                    "secondary_indices": {"type": "array", "items": {"type": "integer"}},
                },
                "required": ["primary_index", "secondary_indices"],
            },
        }
    },
    "required": ["filtered"],
}

CATEGORIZE_SCHEMA = {
    "type": "object",
    "properties": {
        "categorized": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "category_key": {"type": "string"},
                    "rationale": {"type": "string"},
                },
                "required": ["category_key"],
            },
        }
    },
    "required": ["categorized"],
}

GENERATE_SCHEMA = {
    "type": "object",
    "properties": {"report": {"type": "object"}},
    "required": ["report"],
}


def protocol_context(schema: ProtocolSchema) -> dict:
    return {
        "name": schema.name,
        "categories": [
            {"key": c.key, "title": c.title, "scope_description": c.scope_description}
            for c in schema.categories
        ],
    }


def _complete_semantic(
    engine: ChatEngine,
    prompt: str,
    schema: dict,
    check,
    repair_rounds: int,
    failure_label: str,
):
    """complete() plus one corrective round for semantic violations."""
    completion = complete(engine, prompt, schema, repair_rounds)
    problem = check(completion.parsed_value)
    if problem is None:
        return completion.parsed_value
    retry_prompt = (
        f"{prompt}\n\nYour previous answer was rejected: {problem}. "
        "Answer again with a corrected JSON object."
    )
    completion = complete(engine, retry_prompt, schema, repair_rounds)
    problem = check(completion.parsed_value)
    if problem is None:
        return completion.parsed_value
    raise ToolFailure(f"{failure_label}: {problem}", code=TOOL_ERROR)


# -- concept extraction ----------------------------------------------------


def extract_concepts(
    engine: ChatEngine,
    templates: TemplateLibrary,
    report_text: str,
    repair_rounds: int = 2,
) -> list[MedicalConcept]:
    """Pull finding terms with verbatim source sentences from a report.

    Concepts deduplicate on their normalized form (first mention wins) and
    keep first-appearance order.  A concept whose claimed source sentence
    cannot be located in the report is dropped: an extraction that cannot
    be grounded is treated as hallucination, not data.
    """
    prompt = render_with_context(templates.get("extract"), {"report_text": report_text})
    value = complete(engine, prompt, EXTRACT_SCHEMA, repair_rounds).parsed_value
    flat_report = collapse_whitespace(report_text)
    concepts: list[MedicalConcept] = []
    seen: set[str] = set()
    for item in value["concepts"]:
        sentence = collapse_whitespace(item["source_sentence"])
        if sentence and sentence not in flat_report:
            continue
        concept = MedicalConcept(
            text=item["text"],
            source_sentence=sentence,
            polarity=item.get("polarity", "present"),
        )
        if concept.normalized in seen:
            continue
        seen.add(concept.normalized)
        concepts.append(concept)
    return concepts


# -- ontology mapping and filtering -----------------------------------------


def map_concept(client: OntologyClient, concept: dict) -> dict:
    """All annotator hits for one concept (unfiltered mapping set)."""
    hits = client.annotate(concept["normalized"])
    return {"concept": concept, "hits": [h.to_json_obj() for h in hits]}


def filter_mappings(
    engine: ChatEngine,
    templates: TemplateLibrary,
    items: list[dict],
    primary_roots: tuple[str, ...],
    repair_rounds: int = 2,
) -> list[dict]:
    """Partition each concept's hits into one primary and the secondaries."""
    if not items:
        return []

    def check(value: Any):
        filtered = value["filtered"]
        if len(filtered) != len(items):
            return f"expected {len(items)} entries, got {len(filtered)}"
        for item, verdict in zip(items, filtered):
            count = len(item.get("hits", []))
            indices = list(verdict["secondary_indices"])
            if verdict["primary_index"] is not None:
                indices.append(verdict["primary_index"])
            if sorted(indices) != list(range(count)):
                return (
                    f"hits of {item['concept'].get('text', '?')!r} must be partitioned "
                    f"exactly once (got indices {sorted(indices)} for {count} hits)"
                )
            if count and verdict["primary_index"] is None and count == 1:
                return "a single hit must be primary"
        return None

    prompt = render_with_context(
        templates.get("filter"), {"items": items, "primary_roots": list(primary_roots)}
    )
    value = _complete_semantic(
        engine, prompt, FILTER_SCHEMA, check, repair_rounds, "invalid hit partition"
    )
    resolved = []
    for item, verdict in zip(items, value["filtered"]):
        hits = item.get("hits", [])
        primary = verdict["primary_index"]
        resolved.append(
            {
                "concept": item["concept"],
                "primary": hits[primary] if primary is not None else None,
                "secondary": [hits[i] for i in verdict["secondary_indices"]],
            }
        )
    return resolved


# -- categorization ----------------------------------------------------------


def categorize_concepts(
    engine: ChatEngine,
    templates: TemplateLibrary,
    schema: ProtocolSchema,
    concepts: list[dict],
    filtered: list[dict],
    repair_rounds: int = 2,
) -> list[dict]:
    """Assign every concept exactly one protocol section."""
    if not concepts:
        return []
    filtered_by_key = {f["concept"]["normalized"]: f for f in filtered}

    def check(value: Any):
        categorized = value["categorized"]
        if len(categorized) != len(concepts):
            return f"expected {len(concepts)} entries, got {len(categorized)}"
        for item in categorized:
            if item["category_key"] not in schema.keys:
                return f"unknown category letter {item['category_key']!r}"
        return None

    prompt = render_with_context(
        templates.get("categorize"),
        {
            "protocol": protocol_context(schema),
            "concepts": concepts,
            "filtered": filtered,
        },
    )
    value = _complete_semantic(
        engine, prompt, CATEGORIZE_SCHEMA, check, repair_rounds, "INVALID_CATEGORY"
    )
    out = []
    for concept, verdict in zip(concepts, value["categorized"]):
        match = filtered_by_key.get(concept["normalized"], {})
        primary = match.get("primary") or {}
        out.append(
            {
                "concept": concept,
                "category_key": verdict["category_key"],
                "rationale": verdict.get("rationale", ""),
                "primary_ontology_id": primary.get("class_id"),
            }
        )
    return out


# -- report generation --------------------------------------------------------


def generate_report(
    engine: ChatEngine,
    templates: TemplateLibrary,
    schema: ProtocolSchema,
    categorized: list[dict],
    repair_rounds: int = 2,
) -> StructuredReport:
    """Render categorized concepts into a validated structured report."""
    allowed_sentences = set()
    for item in categorized:
        concept = item.get("concept", {})
        if item.get("category_key") not in schema.keys:
            raise ToolFailure(
                f"concept {concept.get('text', '?')!r} carries invalid category "
                f"{item.get('category_key')!r}",
                code=TOOL_ERROR,
            )
        sentence = collapse_whitespace(concept.get("source_sentence", ""))
        if not sentence:
            raise ToolFailure(
                f"concept {concept.get('text', '?')!r} has no source sentence; "
                "refusing to generate an ungrounded finding",
                code=TOOL_ERROR,
            )
        allowed_sentences.add(sentence)

    def check(value: Any):
        try:
            report = StructuredReport.from_json_obj(value["report"])
        except Exception as exc:  # noqa: BLE001 - any shape problem is a rejection
            return f"report does not parse: {exc}"
        verdict = validate_structured_report(report, schema)
        if not verdict.ok:
            return "; ".join(verdict.violations)
        for _, finding in report.iter_findings():
            for sentence in finding.source_sentences:
                if collapse_whitespace(sentence) not in allowed_sentences:
                    return f"finding cites a sentence not present in the source: {sentence!r}"
        return None

    prompt = render_with_context(
        templates.get("generate"),
        {
            "protocol": protocol_context(schema),
            "categorized": categorized,
            "empty_marker": "No relevant findings identified.",
        },
    )
    value = _complete_semantic(
        engine, prompt, GENERATE_SCHEMA, check, repair_rounds, "INVALID_REPORT"
    )
    return StructuredReport.from_json_obj(value["report"])
