"""Descriptors and handlers wiring the six tools onto a ToolServer."""

from __future__ import annotations

from dataclasses import dataclass, field

from radstruct.errors import TOOL_ERROR, AnnotatorUnavailableError
from radstruct.llm.base import ChatEngine
from radstruct.llm.stub import DEFAULT_PRIMARY_ROOTS
from radstruct.llm.templates import TemplateLibrary
from radstruct.mcp.messages import ParamSpec, ToolDescriptor
from radstruct.mcp.server import ToolFailure, ToolServer
from radstruct.ontology import OntologyClient
from radstruct.protocol import ProtocolSchema
from radstruct.tools import operations
from radstruct.tools.cache import CacheStore
from radstruct.util import Clock

CANONICAL_TOOL_NAMES = (
    "get_concept",
    "map_ontology",
    "filter_ontology",
    "categorize_concepts",
    "generate_report",
    "check_cache",
)


@dataclass
class ToolContext:
    """Shared services the tool handlers close over."""

    engine: ChatEngine
    templates: TemplateLibrary
    ontology: OntologyClient
    cache: CacheStore
    schema: ProtocolSchema
    primary_roots: tuple[str, ...] = DEFAULT_PRIMARY_ROOTS
    repair_rounds: int = 2
    clock: Clock = field(default_factory=Clock)


def _check_protocol_param(ctx: ToolContext, params: dict) -> None:
    wanted = params.get("protocol")
    if wanted and wanted != ctx.schema.name:
        raise ToolFailure(
            f"unknown protocol {wanted!r}; this server speaks {ctx.schema.name!r}",
            code=TOOL_ERROR,
        )


def build_tool_server(ctx: ToolContext) -> ToolServer:
    """Register the full toolset in canonical pipeline order."""
    server = ToolServer(clock=ctx.clock)

    def get_concept(params: dict) -> dict:
        concepts = operations.extract_concepts(
            ctx.engine, ctx.templates, params["report_text"], ctx.repair_rounds
        )
        return {"concepts": [c.to_json_obj() for c in concepts]}

    def map_ontology(params: dict) -> dict:
        try:
            sets = [operations.map_concept(ctx.ontology, c) for c in params["concepts"]]
        except AnnotatorUnavailableError as exc:
            raise ToolFailure(f"ANNOTATOR_UNAVAILABLE: {exc}", code=TOOL_ERROR) from exc
        return {"mapping_sets": sets}

    def filter_ontology(params: dict) -> dict:
        filtered = operations.filter_mappings(
            ctx.engine, ctx.templates, params["items"], ctx.primary_roots, ctx.repair_rounds
        )
        return {"filtered": filtered}

    def categorize_concepts(params: dict) -> dict:
        _check_protocol_param(ctx, params)
        categorized = operations.categorize_concepts(
            ctx.engine,
            ctx.templates,
            ctx.schema,
            params["concepts"],
            params.get("filtered", []),
            ctx.repair_rounds,
        )
        if params.get("update_cache"):
            for item in categorized:
                primary = item.get("primary_ontology_id")
                label = ""
                for candidate in params.get("filtered", []):
                    hit = candidate.get("primary") or {}
                    if hit.get("class_id") == primary:
                        label = hit.get("preferred_label", "")
                        break
                ctx.cache.put(item["concept"]["text"], item["category_key"], label)
        return {"categorized": categorized}

    def generate_report(params: dict) -> dict:
        _check_protocol_param(ctx, params)
        report = operations.generate_report(
            ctx.engine, ctx.templates, ctx.schema, params["categorized"], ctx.repair_rounds
        )
        return {"report": report.to_json_obj()}

    def check_cache(params: dict) -> dict:
        entry = ctx.cache.check(params["concept"])
        from radstruct.textproc import normalize_concept

        payload = {"key": normalize_concept(params["concept"]), "hit": entry is not None}
        if entry is not None:
            payload["entry"] = entry.to_json_obj()
        return payload

    server.register(
        ToolDescriptor(
            name="get_concept",
            description=(
                "Extract clinically relevant finding terms from a free-text report; "
                "each concept carries its verbatim source sentence and polarity."
            ),
            param_schema={"report_text": ParamSpec("string", description="the free-text report")},
            result_schema={"concepts": ParamSpec("array")},
        ),
        get_concept,
    )
    server.register(
        ToolDescriptor(
            name="map_ontology",
            description=(
                "Map each concept to its ontology representations (all annotator hits "
                "with full ancestor chains)."
            ),
            param_schema={"concepts": ParamSpec("array", description="concept objects")},
            result_schema={"mapping_sets": ParamSpec("array")},
        ),
        map_ontology,
    )
    server.register(
        ToolDescriptor(
            name="filter_ontology",
            description=(
                "Split each concept's ontology hits into the primary mapping (the "
                "principal finding) and secondary mappings (severity, location, detail)."
            ),
            param_schema={"items": ParamSpec("array", description="mapping sets from map_ontology")},
            result_schema={"filtered": ParamSpec("array")},
        ),
        filter_ontology,
    )
    server.register(
        ToolDescriptor(
            name="categorize_concepts",
            description="Assign each concept to exactly one protocol section (with rationale).",
            param_schema={
                "concepts": ParamSpec("array"),
                "filtered": ParamSpec("array", required=False),
                "protocol": ParamSpec("string", required=False),
                "update_cache": ParamSpec("boolean", required=False),
            },
            result_schema={"categorized": ParamSpec("array")},
        ),
        categorize_concepts,
    )
    server.register(
        ToolDescriptor(
            name="generate_report",
            description=(
                "Render categorized concepts into a protocol-compliant structured "
                "report with grounded findings."
            ),
            param_schema={
                "categorized": ParamSpec("array"),
                "protocol": ParamSpec("string", required=False),
            },
            result_schema={"report": ParamSpec("object")},
        ),
        generate_report,
    )
    server.register(
        ToolDescriptor(
            name="check_cache",
            description="Look up a concept's cached categorization by normalized form.",
            param_schema={"concept": ParamSpec("string")},
            result_schema={
                "hit": ParamSpec("boolean"),
                "key": ParamSpec("string"),
                "entry": ParamSpec("object", required=False),
            },
        ),
        check_cache,
    )
    return server
