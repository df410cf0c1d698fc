"""Per-tool timing aggregation over pipeline traces.

Produces one row per task kind with mean planning, per-tool, and overall
seconds; tools a task never invokes render as a dash in the text table
(the cache-lookup tool has no column of its own and only shows up in the
overall figure).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Protocol

from radstruct.errors import EmptyInputError

TIMING_COLUMNS = (
    "planning",
    "get_concept",
    "ontology_mapping",
    "ontology_filtering",
    "concept_categorization",
    "report_generation",
    "overall",
)

TOOL_COLUMN = {
    "get_concept": "get_concept",
    "map_ontology": "ontology_mapping",
    "filter_ontology": "ontology_filtering",
    "categorize_concepts": "concept_categorization",
    "generate_report": "report_generation",
}

DASH = "-"


class TraceTimings(Protocol):
    task_kind: str

    @property
    def planning_total_ms(self) -> int: ...

    @property
    def tool_totals_ms(self) -> dict[str, int]: ...

    @property
    def overall_ms(self) -> int: ...


@dataclass(frozen=True)
class TimingRow:
    """Means in seconds; None marks a column no trace ever exercised."""

    task_kind: str
    values: dict[str, float | None]
    n_traces: int

    def to_json_obj(self) -> dict:
        obj: dict = {"task_kind": self.task_kind}
        obj.update({col: self.values[col] for col in TIMING_COLUMNS})
        obj["n_traces"] = self.n_traces
        return obj

    def render_cells(self, decimals: int = 1) -> list[str]:
        cells = [self.task_kind]
        for col in TIMING_COLUMNS:
            value = self.values[col]
            cells.append(DASH if value is None else f"{value:.{decimals}f}")
        return cells


def timing_table(traces: Iterable[TraceTimings], task_kind: str) -> TimingRow:
    """Aggregate traces of one task kind into a single timing row."""
    traces = list(traces)
    if not traces:
        raise EmptyInputError("EMPTY_INPUT: no traces to aggregate")
    for trace in traces:
        if trace.task_kind != task_kind:
            raise ValueError(f"trace of kind {trace.task_kind!r} in a {task_kind!r} table")

    n = len(traces)
    sums: dict[str, float] = {col: 0.0 for col in TIMING_COLUMNS}
    seen: set[str] = {"planning", "overall"}
    for trace in traces:
        sums["planning"] += trace.planning_total_ms
        sums["overall"] += trace.overall_ms
        for tool, total in trace.tool_totals_ms.items():
            column = TOOL_COLUMN.get(tool)
            if column is None:
                continue
            sums[column] += total
            seen.add(column)

    values: dict[str, float | None] = {}
    for col in TIMING_COLUMNS:
        values[col] = (sums[col] / n) / 1000.0 if col in seen else None
    return TimingRow(task_kind=task_kind, values=values, n_traces=n)


def render_timing_table(rows: list[TimingRow], decimals: int = 1) -> str:
    """Fixed-width text table, one row per task kind."""
    header = ["task", *TIMING_COLUMNS]
    grid = [header] + [row.render_cells(decimals) for row in rows]
    widths = [max(len(line[i]) for line in grid) for i in range(len(header))]
    lines = []
    for line in grid:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
    return "\n".join(lines) + "\n"
