"""Ingestion and aggregation of expert report-quality scores.

Raters score each sample on two 1-5 axes: clinical accuracy against the
reference report, and adherence to the protocol structure.  Aggregation
is arithmetic means per rater, per rater group, and pooled, reported to
two decimals.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RubricRow:
    sample_id: str
    rater_id: str
    accuracy_score: int
    structure_score: int
    group: str = ""

    def __post_init__(self):
        for name, score in (("accuracy_score", self.accuracy_score), ("structure_score", self.structure_score)):
            if not isinstance(score, int) or not 1 <= score <= 5:
                raise ValueError(f"{name} must be an integer in 1..5, got {score!r}")
        if not self.group:
            object.__setattr__(self, "group", self.rater_id)


@dataclass(frozen=True)
class RubricSummary:
    """Means as (accuracy, structure) pairs, rounded to 2 decimals."""

    per_rater: dict[str, tuple[float, float]]
    per_group: dict[str, tuple[float, float]]
    pooled: tuple[float, float]
    n_rows: int


def ingest_rubric_rows(rows: list[dict]) -> list[RubricRow]:
    """Validate raw score records; a bad row is rejected with its number."""
    parsed = []
    for i, row in enumerate(rows, start=1):
        try:
            parsed.append(
                RubricRow(
                    sample_id=str(row["sample_id"]),
                    rater_id=str(row["rater_id"]),
                    accuracy_score=row["accuracy_score"],
                    structure_score=row["structure_score"],
                    group=str(row.get("group", "")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"rubric row {i}: {exc}") from exc
    return parsed


def _means(rows: list[RubricRow]) -> tuple[float, float]:
    n = len(rows)
    accuracy = round(sum(r.accuracy_score for r in rows) / n, 2)
    structure = round(sum(r.structure_score for r in rows) / n, 2)
    return accuracy, structure


def rubric_aggregate(rows: list[RubricRow]) -> RubricSummary:
    if not rows:
        raise ValueError("no rubric rows to aggregate")
    raters: dict[str, list[RubricRow]] = {}
    groups: dict[str, list[RubricRow]] = {}
    for row in rows:
        raters.setdefault(row.rater_id, []).append(row)
        groups.setdefault(row.group, []).append(row)
    return RubricSummary(
        per_rater={rid: _means(rs) for rid, rs in sorted(raters.items())},
        per_group={gid: _means(rs) for gid, rs in sorted(groups.items())},
        pooled=_means(rows),
        n_rows=len(rows),
    )
