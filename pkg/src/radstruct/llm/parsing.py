"""Robust extraction of structured objects from model output.

Reasoning models wrap their chain of thought in delimiter tags and often
surround the answer with prose or code fences; parsing strips the
reasoning (preserving it for the trace), then scans for the first JSON
object that satisfies the requested schema.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any

import jsonschema

DEFAULT_REASONING_DELIMITERS = ("<think>", "</think>")


@dataclass(frozen=True)
class ParseFailure:
    kind: str  # "no_object" or "schema"
    detail: str
    field_path: str = ""

    def __str__(self) -> str:
        path = f" at {self.field_path}" if self.field_path else ""
        return f"{self.kind}{path}: {self.detail}"


def strip_reasoning(
    text: str, delimiters: tuple[str, str] = DEFAULT_REASONING_DELIMITERS
) -> tuple[str, str]:
    """Split model output into (visible text, concatenated reasoning).

    Every delimited block is removed from the visible text; an unclosed
    opening delimiter swallows the rest of the string (the model was still
    thinking when it stopped).
    """
    open_tag, close_tag = delimiters
    pattern = re.compile(re.escape(open_tag) + r"(.*?)" + re.escape(close_tag), re.DOTALL)
    reasoning_parts = pattern.findall(text)
    visible = pattern.sub("", text)
    dangling = visible.find(open_tag)
    if dangling >= 0:
        reasoning_parts.append(visible[dangling + len(open_tag) :])
        visible = visible[:dangling]
    return visible, "\n".join(part.strip() for part in reasoning_parts if part.strip())


def validate_schema(value: Any, schema: dict | None) -> ParseFailure | None:
    if schema is None:
        return None
    try:
        jsonschema.validate(value, schema)
        return None
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        return ParseFailure(kind="schema", detail=exc.message, field_path=path)


def parse_structured_output(
    text: str,
    schema: dict | None = None,
    delimiters: tuple[str, str] = DEFAULT_REASONING_DELIMITERS,
) -> tuple[Any, ParseFailure | None, str]:
    """Find the first schema-satisfying JSON object in model output.

    Returns (value, failure, reasoning_text); exactly one of value/failure
    is meaningful.  Scanning ignores prose and fences: every '{' starts a
    candidate parse, and a candidate that parses but fails the schema is
    skipped in favor of later candidates (the failure reported on a fully
    unsuccessful scan is the first schema mismatch encountered).
    """
    visible, reasoning = strip_reasoning(text, delimiters)
    decoder = json.JSONDecoder()
    first_schema_failure: ParseFailure | None = None
    position = visible.find("{")
    while position >= 0:
        try:
            candidate, _ = decoder.raw_decode(visible, position)
        except ValueError:
            candidate = None
        if isinstance(candidate, dict):
            failure = validate_schema(candidate, schema)
            if failure is None:
                return candidate, None, reasoning
            if first_schema_failure is None:
                first_schema_failure = failure
        position = visible.find("{", position + 1)
    if first_schema_failure is not None:
        return None, first_schema_failure, reasoning
    return None, ParseFailure(kind="no_object", detail="no JSON object found in output"), reasoning
