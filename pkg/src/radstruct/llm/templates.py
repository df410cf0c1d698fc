"""Prompt templates: versioned files with double-brace placeholders.

Templates live in data files, not code, so prompt changes are diffable.
Each carries a role tag (plan, observe, extract, filter, categorize,
generate) and an ordered few-shot exemplar list appended at render time.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

ROLE_TAGS = ("plan", "observe", "extract", "filter", "categorize", "generate")

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    role_tag: str
    body: str
    exemplars: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.role_tag not in ROLE_TAGS:
            raise ValueError(f"unknown role tag {self.role_tag!r}")

    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER.findall(self.body))

    def render(self, values: dict[str, str]) -> str:
        """Fill every placeholder; a missing value is a hard error."""
        missing = self.placeholders() - values.keys()
        if missing:
            raise KeyError(f"template {self.name!r} missing values for {sorted(missing)}")
        text = _PLACEHOLDER.sub(lambda m: values[m.group(1)], self.body)
        if self.exemplars:
            blocks = ["", "### examples"]
            for exemplar_in, exemplar_out in self.exemplars:
                blocks.append(f"Example input: {exemplar_in}")
                blocks.append(f"Example output: {exemplar_out}")
            text = text.rstrip("\n") + "\n" + "\n".join(blocks) + "\n"
        return text

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PromptTemplate":
        return cls(
            name=obj["name"],
            role_tag=obj["role_tag"],
            body=obj["body"],
            exemplars=tuple((e["input"], e["output"]) for e in obj.get("exemplars", ())),
        )


def render_with_context(template: "PromptTemplate", context_obj, **extra: str) -> str:
    """Render a template whose machine-readable payload is one JSON block."""
    values = {"context": json.dumps(context_obj, indent=2, ensure_ascii=False)}
    values.update(extra)
    return template.render(values)


@dataclass
class TemplateLibrary:
    """All six role templates, loaded from a directory or the bundle."""

    templates: dict[str, PromptTemplate] = field(default_factory=dict)

    def get(self, role_tag: str) -> PromptTemplate:
        if role_tag not in self.templates:
            raise KeyError(f"no template for role {role_tag!r}")
        return self.templates[role_tag]

    @classmethod
    def load_dir(cls, directory: str | Path) -> "TemplateLibrary":
        library = cls()
        for path in sorted(Path(directory).glob("*.json")):
            template = PromptTemplate.from_json_obj(json.loads(path.read_text("utf-8")))
            library.templates[template.role_tag] = template
        return library

    @classmethod
    def load_bundled(cls) -> "TemplateLibrary":
        library = cls()
        root = resources.files("radstruct.data").joinpath("templates")
        for entry in sorted(root.iterdir(), key=lambda e: e.name):
            if entry.name.endswith(".json"):
                template = PromptTemplate.from_json_obj(json.loads(entry.read_text("utf-8")))
                library.templates[template.role_tag] = template
        return library
