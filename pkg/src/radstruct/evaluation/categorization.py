"""Multiclass metrics and confusion matrix for concept categorization."""

from __future__ import annotations

from dataclasses import dataclass

from radstruct.errors import EmptyInputError
from radstruct.protocol import ProtocolSchema


@dataclass(frozen=True)
class CategorizationReport:
    """Confusion matrix (rows gold, columns predicted) and derived scores.

    ``per_class`` maps category key to (precision, recall, f1, jaccard);
    ``macro``/``weighted`` are (P, R, F1, Jaccard) tuples.  Macro averages
    run over classes with gold support > 0; weighted averages weight by
    gold support.
    """

    keys: tuple[str, ...]
    confusion: dict[str, dict[str, int]]
    per_class: dict[str, tuple[float, float, float, float]]
    macro: tuple[float, float, float, float]
    weighted: tuple[float, float, float, float]
    n_pairs: int

    def gold_count(self, key: str) -> int:
        return sum(self.confusion[key].values())


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def categorization_metrics(
    pairs: list[tuple[str, str]], schema: ProtocolSchema
) -> CategorizationReport:
    """Score (predicted_key, gold_key) pairs against the protocol classes.

    Per class: TP is the diagonal cell, FP the rest of its column, FN the
    rest of its row; jaccard = TP / (TP + FP + FN).
    """
    if not pairs:
        raise EmptyInputError("EMPTY_INPUT: no categorization pairs")
    keys = schema.keys
    for pred_key, gold_key in pairs:
        if pred_key not in keys or gold_key not in keys:
            raise ValueError(f"pair ({pred_key!r}, {gold_key!r}) outside schema keys {keys}")

    confusion = {g: {p: 0 for p in keys} for g in keys}
    for pred_key, gold_key in pairs:
        confusion[gold_key][pred_key] += 1

    per_class: dict[str, tuple[float, float, float, float]] = {}
    supports: dict[str, int] = {}
    for key in keys:
        tp = confusion[key][key]
        fn = sum(confusion[key].values()) - tp
        fp = sum(confusion[g][key] for g in keys) - tp
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        jaccard = _safe_div(tp, tp + fp + fn)
        per_class[key] = (precision, recall, f1, jaccard)
        supports[key] = tp + fn

    supported = [k for k in keys if supports[k] > 0]
    total = sum(supports[k] for k in supported)
    macro = [0.0] * 4
    weighted = [0.0] * 4
    for key in supported:
        for i in range(4):
            macro[i] += per_class[key][i] / len(supported)
            weighted[i] += per_class[key][i] * supports[key] / total

    return CategorizationReport(
        keys=keys,
        confusion=confusion,
        per_class=per_class,
        macro=tuple(macro),
        weighted=tuple(weighted),
        n_pairs=len(pairs),
    )
