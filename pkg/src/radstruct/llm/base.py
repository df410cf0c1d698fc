"""Engine interface and the schema-checked completion loop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol, runtime_checkable

from radstruct.errors import MalformedOutputError
from radstruct.llm.parsing import DEFAULT_REASONING_DELIMITERS, parse_structured_output

# Two repair rounds, then fail: bounded retries keep per-step timing
# measurements meaningful.
DEFAULT_REPAIR_ROUNDS = 2


@runtime_checkable
class ChatEngine(Protocol):
    """Anything that turns a message list into raw completion text.

    The remote client and the deterministic stub both satisfy this; the
    pipeline cannot tell them apart except by the content they produce.
    """

    def chat(self, messages: list[dict[str, str]]) -> str: ...


@dataclass(frozen=True)
class StructuredCompletion:
    raw_text: str
    parsed_value: Any
    reasoning_text: str = ""


def complete(
    engine: ChatEngine,
    prompt: str,
    expected_schema: dict | None,
    repair_rounds: int = DEFAULT_REPAIR_ROUNDS,
    reasoning_delimiters: tuple[str, str] = DEFAULT_REASONING_DELIMITERS,
) -> StructuredCompletion:
    """Run one prompt to a schema-conforming parse, repairing if needed.

    Each repair round appends the model's raw reply and a correction
    request to the conversation; the original prompt is never dropped.
    After the final round a still-unparseable reply raises
    MalformedOutputError carrying the raw text for the trace.
    """
    messages = [{"role": "user", "content": prompt}]
    raw = ""
    for _ in range(repair_rounds + 1):
        raw = engine.chat(messages)
        value, failure, reasoning = parse_structured_output(raw, expected_schema, reasoning_delimiters)
        if failure is None:
            return StructuredCompletion(raw_text=raw, parsed_value=value, reasoning_text=reasoning)
        messages.append({"role": "assistant", "content": raw})
        messages.append(
            {
                "role": "user",
                "content": (
                    f"Your previous reply could not be used ({failure}). "
                    "Reply again with only a single corrected JSON object in the required shape."
                ),
            }
        )
    raise MalformedOutputError(
        f"engine output never satisfied the schema after {repair_rounds} repair rounds",
        raw_text=raw,
        attempts=repair_rounds + 1,
    )
