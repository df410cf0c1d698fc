"""Clinical protocol schema and the report/concept data model.

The protocol is data-driven: the bundled six-section chest X-ray schema
(sections A through F) is the shipped default, but any schema file with
the same shape works and report structure follows it exactly.

All types are immutable values; they are safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Any, Iterator

from radstruct.textproc import POLARITY_PRESENT, normalize_concept
from radstruct.util import collapse_whitespace

EMPTY_SECTION_MARKER = "No relevant findings identified."


class ReportParseError(ValueError):
    """A report or schema document failed to parse; ``location`` says where."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{message}{f' at {location}' if location else ''}")
        self.location = location


@dataclass(frozen=True)
class ProtocolCategory:
    """One lettered section of the reporting protocol."""

    key: str
    title: str
    scope_description: str

    def __post_init__(self):
        if not (len(self.key) == 1 and self.key.isalpha() and self.key.isupper()):
            raise ValueError(f"category key must be a single uppercase letter, got {self.key!r}")
        if not self.scope_description.strip():
            raise ValueError(f"category {self.key}: scope_description must be non-empty")


@dataclass(frozen=True)
class ProtocolSchema:
    """Ordered set of protocol categories; order defines section order."""

    name: str
    categories: tuple[ProtocolCategory, ...]
    version: str = "1"

    def __post_init__(self):
        keys = [c.key for c in self.categories]
        if len(keys) != len(set(keys)):
            raise ValueError(f"duplicate category keys in schema {self.name!r}: {keys}")
        if not keys:
            raise ValueError("schema must define at least one category")

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(c.key for c in self.categories)

    def category(self, key: str) -> ProtocolCategory:
        for cat in self.categories:
            if cat.key == key:
                return cat
        raise KeyError(key)

    def __contains__(self, key: str) -> bool:
        return key in self.keys

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "version": self.version,
            "categories": [
                {"key": c.key, "title": c.title, "scope_description": c.scope_description}
                for c in self.categories
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "ProtocolSchema":
        try:
            categories = tuple(
                ProtocolCategory(
                    key=c["key"], title=c["title"], scope_description=c["scope_description"]
                )
                for c in obj["categories"]
            )
            return cls(name=obj["name"], categories=categories, version=str(obj.get("version", "1")))
        except (KeyError, TypeError) as exc:
            raise ReportParseError(f"malformed protocol schema: {exc}") from exc


def load_schema_file(path: str) -> ProtocolSchema:
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ReportParseError(str(exc), location=f"{path}:{exc.lineno}:{exc.colno}") from exc
    return ProtocolSchema.from_json_obj(obj)


def load_default_schema() -> ProtocolSchema:
    """Load the bundled six-section chest X-ray protocol."""
    text = resources.files("radstruct.data").joinpath("abcdef_protocol.json").read_text("utf-8")
    return ProtocolSchema.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class MedicalConcept:
    """A clinically relevant finding term tied back to its source sentence.

    ``normalized`` is always derived from ``text``; ``polarity`` records
    whether the source asserts, negates, or hedges the finding (negation
    stays visible in the source sentence either way).
    """

    text: str
    normalized: str = ""
    source_sentence: str = ""
    polarity: str = POLARITY_PRESENT

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("concept text must be non-empty")
        if not self.normalized:
            object.__setattr__(self, "normalized", normalize_concept(self.text))

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "normalized": self.normalized,
            "source_sentence": self.source_sentence,
            "polarity": self.polarity,
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "MedicalConcept":
        return cls(
            text=obj["text"],
            normalized=obj.get("normalized", ""),
            source_sentence=obj.get("source_sentence", ""),
            polarity=obj.get("polarity", POLARITY_PRESENT),
        )


@dataclass(frozen=True)
class CategorizedConcept:
    """A concept with its protocol section assignment."""

    concept: MedicalConcept
    category_key: str
    rationale: str = ""
    primary_ontology_id: str | None = None

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "concept": self.concept.to_json_obj(),
            "category_key": self.category_key,
            "rationale": self.rationale,
            "primary_ontology_id": self.primary_ontology_id,
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "CategorizedConcept":
        return cls(
            concept=MedicalConcept.from_json_obj(obj["concept"]),
            category_key=obj["category_key"],
            rationale=obj.get("rationale", ""),
            primary_ontology_id=obj.get("primary_ontology_id"),
        )


@dataclass(frozen=True)
class Finding:
    """One generated statement, grounded in verbatim source sentences."""

    text: str
    concepts: tuple[str, ...] = ()
    source_sentences: tuple[str, ...] = ()

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "concepts": list(self.concepts),
            "source_sentences": list(self.source_sentences),
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "Finding":
        return cls(
            text=obj["text"],
            concepts=tuple(obj.get("concepts", ())),
            source_sentences=tuple(obj.get("source_sentences", ())),
        )


@dataclass(frozen=True)
class ReportSection:
    """One protocol section; empty sections carry an explicit marker."""

    key: str
    title: str
    findings: tuple[Finding, ...] = ()
    empty_marker: str | None = None

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "title": self.title,
            "findings": [f.to_json_obj() for f in self.findings],
            "empty_marker": self.empty_marker,
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "ReportSection":
        return cls(
            key=obj["key"],
            title=obj["title"],
            findings=tuple(Finding.from_json_obj(f) for f in obj.get("findings", ())),
            empty_marker=obj.get("empty_marker"),
        )


@dataclass(frozen=True)
class StructuredReport:
    """The terminal output: one section per protocol category, in order."""

    protocol_name: str
    sections: tuple[ReportSection, ...]

    def section(self, key: str) -> ReportSection:
        for sec in self.sections:
            if sec.key == key:
                return sec
        raise KeyError(key)

    def iter_findings(self) -> Iterator[tuple[str, Finding]]:
        for sec in self.sections:
            for finding in sec.findings:
                yield sec.key, finding

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "protocol_name": self.protocol_name,
            "sections": [s.to_json_obj() for s in self.sections],
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "StructuredReport":
        try:
            return cls(
                protocol_name=obj["protocol_name"],
                sections=tuple(ReportSection.from_json_obj(s) for s in obj["sections"]),
            )
        except (KeyError, TypeError) as exc:
            raise ReportParseError(f"malformed report document: {exc}") from exc


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of structural validation; violations are data, not errors."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_structured_report(report: StructuredReport, schema: ProtocolSchema) -> ValidationResult:
    """Check a report against every structural invariant of the schema.

    Rules: protocol name matches; exactly one section per category, in
    schema order, titles matching; empty sections carry the explicit
    marker; every finding has non-empty text and at least one source
    sentence (no ungrounded findings, ever).
    """
    violations: list[str] = []
    if report.protocol_name != schema.name:
        violations.append(
            f"protocol name mismatch: report says {report.protocol_name!r}, schema is {schema.name!r}"
        )
    present = [s.key for s in report.sections]
    for key in schema.keys:
        if key not in present:
            violations.append(f"missing section {key}")
    for key in present:
        if key not in schema.keys:
            violations.append(f"unknown section {key}")
    if not violations and present != list(schema.keys):
        violations.append(f"sections out of schema order: {present}")
    for sec in report.sections:
        if sec.key in schema.keys and sec.title != schema.category(sec.key).title:
            violations.append(f"section {sec.key}: title mismatch ({sec.title!r})")
        if not sec.findings and not (sec.empty_marker and sec.empty_marker.strip()):
            violations.append(f"section {sec.key}: empty without explicit marker")
        if sec.findings and sec.empty_marker is not None:
            violations.append(f"section {sec.key}: marker present alongside findings")
        for i, finding in enumerate(sec.findings):
            if not finding.text.strip():
                violations.append(f"section {sec.key} finding {i}: empty text")
            if not finding.source_sentences:
                violations.append(f"section {sec.key} finding {i}: ungrounded finding")
    return ValidationResult(tuple(violations))


def verify_grounding(report: StructuredReport, source_text: str) -> list[str]:
    """Check that every cited source sentence occurs verbatim in the source.

    Containment is judged after whitespace normalization on both sides.
    Returns violation strings, empty when fully grounded.
    """
    flat = collapse_whitespace(source_text)
    problems = []
    for key, finding in report.iter_findings():
        for sentence in finding.source_sentences:
            if collapse_whitespace(sentence) not in flat:
                problems.append(f"section {key}: sentence not in source: {sentence!r}")
    return problems


def serialize_report(report: StructuredReport) -> str:
    """Canonical byte-deterministic document form (stable field order)."""
    return json.dumps(report.to_json_obj(), ensure_ascii=False, indent=2) + "\n"


def deserialize_report(document: str) -> StructuredReport:
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ReportParseError(str(exc), location=f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(obj, dict):
        raise ReportParseError("report document must be a JSON object", location="top level")
    return StructuredReport.from_json_obj(obj)


def render_report_text(report: StructuredReport) -> str:
    """Plain-text rendering with lettered section headers."""
    lines = [f"Structured report ({report.protocol_name} protocol)", ""]
    for sec in report.sections:
        lines.append(f"{sec.key}. {sec.title}")
        if sec.findings:
            for finding in sec.findings:
                lines.append(f"  - {finding.text}")
        else:
            lines.append(f"  - {sec.empty_marker or EMPTY_SECTION_MARKER}")
        lines.append("")
    return "\n".join(lines)


def empty_report(schema: ProtocolSchema) -> StructuredReport:
    """All-sections-empty report, still structurally valid."""
    return StructuredReport(
        protocol_name=schema.name,
        sections=tuple(
            ReportSection(key=c.key, title=c.title, findings=(), empty_marker=EMPTY_SECTION_MARKER)
            for c in schema.categories
        ),
    )
