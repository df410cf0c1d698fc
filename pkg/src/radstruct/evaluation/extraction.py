"""Multi-label metrics for concept extraction over aligned corpora.

Counting model: every gold concept contributes its normalized text as a
label; matched predictions inherit the label of the gold item they
aligned to; unmatched gold items are false negatives of their own label;
unmatched predictions are false positives attributed to the most similar
label string in the corpus label space (or to a reserved out-of-vocab
label when nothing is even slightly similar).
"""

from __future__ import annotations

from dataclasses import dataclass

from radstruct.errors import EmptyInputError
from radstruct.evaluation.fuzzy import Alignment, eval_normalize, fuzzy_similarity

OUT_OF_VOCAB = "__OUT_OF_VOCAB__"


@dataclass(frozen=True)
class EvaluatedReport:
    """One report's predicted and gold concept lists plus their alignment."""

    report_id: str
    pred: tuple[str, ...]
    gold: tuple[str, ...]
    alignment: Alignment


@dataclass(frozen=True)
class LabelCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def support(self) -> int:
        return self.tp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate extraction metrics; (macro, weighted) pairs throughout."""

    per_label: dict[str, LabelCounts]
    precision: tuple[float, float]
    recall: tuple[float, float]
    f1: tuple[float, float]
    subset_accuracy: float
    hamming_loss: float
    n_samples: int
    label_space_size: int


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _prf(counts: LabelCounts) -> tuple[float, float, float]:
    precision = _safe_div(counts.tp, counts.tp + counts.fp)
    recall = _safe_div(counts.tp, counts.tp + counts.fn)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return precision, recall, f1


def attribute_false_positive(pred_text: str, label_space: list[str]) -> str:
    """Label charged with an unmatched prediction.

    The most similar label string wins (ties broken by label ascending);
    zero similarity to everything lands on the reserved out-of-vocab
    label, which never enters macro averaging but still counts in hamming
    loss.
    """
    best_label = OUT_OF_VOCAB
    best_sim = 0.0
    for label in sorted(label_space):
        sim = fuzzy_similarity(pred_text, label)
        if sim > best_sim:
            best_sim = sim
            best_label = label
    return best_label


def extraction_metrics(
    reports: list[EvaluatedReport], label_space: set[str] | None = None
) -> MetricsReport:
    """Compute the multi-label metric suite over an aligned corpus.

    macro averages run over labels with gold support > 0; weighted
    averages weight by gold support.  subset accuracy counts reports whose
    alignment left nothing unmatched on either side.  hamming loss is
    (total FP + total FN) / (label-space size x report count).
    """
    if not reports:
        raise EmptyInputError("EMPTY_CORPUS: no reports to evaluate")
    if label_space is None:
        label_space = {eval_normalize(g) for r in reports for g in r.gold}
    ordered_labels = sorted(label_space)

    tp: dict[str, int] = {}
    fp: dict[str, int] = {}
    fn: dict[str, int] = {}
    for report in reports:
        for _, gi, _ in report.alignment.matched:
            label = eval_normalize(report.gold[gi])
            tp[label] = tp.get(label, 0) + 1
        for gi in report.alignment.unmatched_gold:
            label = eval_normalize(report.gold[gi])
            fn[label] = fn.get(label, 0) + 1
        for pi in report.alignment.unmatched_pred:
            label = attribute_false_positive(report.pred[pi], ordered_labels)
            fp[label] = fp.get(label, 0) + 1

    all_labels = ordered_labels + ([OUT_OF_VOCAB] if OUT_OF_VOCAB in fp else [])
    per_label = {
        label: LabelCounts(tp.get(label, 0), fp.get(label, 0), fn.get(label, 0))
        for label in all_labels
    }

    supported = [label for label in ordered_labels if per_label[label].support > 0]
    total_support = sum(per_label[label].support for label in supported)
    macro = [0.0, 0.0, 0.0]
    weighted = [0.0, 0.0, 0.0]
    for label in supported:
        prf = _prf(per_label[label])
        weight = per_label[label].support / total_support
        for i in range(3):
            macro[i] += prf[i] / len(supported)
            weighted[i] += prf[i] * weight

    total_fp = sum(fp.values())
    total_fn = sum(fn.values())
    subset_accuracy = sum(1 for r in reports if r.alignment.perfect) / len(reports)
    hamming = (total_fp + total_fn) / (max(1, len(label_space)) * len(reports))

    return MetricsReport(
        per_label=per_label,
        precision=(macro[0], weighted[0]),
        recall=(macro[1], weighted[1]),
        f1=(macro[2], weighted[2]),
        subset_accuracy=subset_accuracy,
        hamming_loss=hamming,
        n_samples=len(reports),
        label_space_size=len(label_space),
    )
