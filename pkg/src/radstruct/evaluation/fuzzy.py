"""Fuzzy string similarity and one-to-one concept alignment.

Predicted concepts rarely match annotations character for character
("no effusion" vs "absence of effusion"), so alignment runs on an
edit-distance similarity with a configurable threshold instead of exact
string equality.
"""

from __future__ import annotations

from dataclasses import dataclass

from radstruct.util import collapse_whitespace


def eval_normalize(text: str) -> str:
    """Evaluation-side normalization: lowercase + whitespace collapse.

    Deliberately lighter than concept-key normalization: no lemmatization,
    so "opacity" and "opacities" stay distinct strings and their distance
    is measured, not erased.
    """
    return collapse_whitespace(text.lower())


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute, unit costs), two-row DP."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        current = [i]
        for j, ch_b in enumerate(b, start=1):
            cost = 0 if ch_a == ch_b else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def fuzzy_similarity(a: str, b: str) -> float:
    """Similarity score in [0, 100], rounded to 4 decimals.

    score = (1 - levenshtein(na, nb) / max(|na|, |nb|)) * 100 over the
    normalized forms.  Symmetric; 100 exactly when the normalized forms
    are equal (two empties count as equal); empty-vs-nonempty is 0.
    """
    na, nb = eval_normalize(a), eval_normalize(b)
    if na == nb:
        return 100.0
    longest = max(len(na), len(nb))
    if longest == 0:
        return 100.0
    if not na or not nb:
        return 0.0
    return round((1.0 - levenshtein(na, nb) / longest) * 100.0, 4)


@dataclass(frozen=True)
class Alignment:
    """One-to-one matching between predicted and gold concept lists.

    ``matched`` pairs are (pred_index, gold_index, similarity); indices
    never repeat and every matched similarity is >= the threshold used.
    """

    matched: tuple[tuple[int, int, float], ...]
    unmatched_pred: tuple[int, ...]
    unmatched_gold: tuple[int, ...]
    threshold: float

    @property
    def perfect(self) -> bool:
        return not self.unmatched_pred and not self.unmatched_gold


def candidate_pairs(pred: list[str], gold: list[str], threshold: float) -> list[tuple[int, int, float]]:
    """All (pred_i, gold_j, sim) pairs at or above threshold, in greedy order.

    Order: similarity descending, then gold text ascending, then pred text
    ascending; index pairs break exact text ties so the order is total.
    """
    pairs = []
    for gi, gtext in enumerate(gold):
        for pi, ptext in enumerate(pred):
            sim = fuzzy_similarity(ptext, gtext)
            if sim >= threshold:
                pairs.append((pi, gi, sim))
    pairs.sort(key=lambda t: (-t[2], gold[t[1]], pred[t[0]], t[1], t[0]))
    return pairs


def align_concepts(pred: list[str], gold: list[str], threshold: float) -> Alignment:
    """Greedy one-to-one alignment of predictions to gold annotations.

    Walk the ordered candidate pairs and accept each whose prediction and
    gold item are both still unmatched.
    """
    if not 0 < threshold <= 100:
        raise ValueError(f"threshold must be in (0, 100], got {threshold}")
    used_pred: set[int] = set()
    used_gold: set[int] = set()
    matched = []
    for pi, gi, sim in candidate_pairs(pred, gold, threshold):
        if pi in used_pred or gi in used_gold:
            continue
        used_pred.add(pi)
        used_gold.add(gi)
        matched.append((pi, gi, sim))
    return Alignment(
        matched=tuple(matched),
        unmatched_pred=tuple(i for i in range(len(pred)) if i not in used_pred),
        unmatched_gold=tuple(i for i in range(len(gold)) if i not in used_gold),
        threshold=threshold,
    )
