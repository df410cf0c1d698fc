"""Evaluation harness: alignment, multi-label and multiclass metrics,
paired significance testing, rubric aggregation, and timing tables."""

from radstruct.evaluation.fuzzy import Alignment, align_concepts, fuzzy_similarity
from radstruct.evaluation.extraction import EvaluatedReport, MetricsReport, extraction_metrics
from radstruct.evaluation.categorization import CategorizationReport, categorization_metrics
from radstruct.evaluation.mcnemar import mcnemar_test
from radstruct.evaluation.rubric import RubricRow, rubric_aggregate
from radstruct.evaluation.timing import TIMING_COLUMNS, timing_table

__all__ = [
    "Alignment",
    "align_concepts",
    "fuzzy_similarity",
    "EvaluatedReport",
    "MetricsReport",
    "extraction_metrics",
    "CategorizationReport",
    "categorization_metrics",
    "mcnemar_test",
    "RubricRow",
    "rubric_aggregate",
    "TIMING_COLUMNS",
    "timing_table",
]
