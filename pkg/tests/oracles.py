"""Independent oracle implementations used to pin expected test values.

Everything here is deliberately written against the documented contracts,
not against the package code: full-matrix edit distance, brute-force
matching enumeration, dictionary-based metric recounts, exact rational
binomial tails, and quadrature for the chi-square survival function.
None of it imports the modules it checks.
"""

from __future__ import annotations

import math
from fractions import Fraction


def levenshtein_full_matrix(a: str, b: str) -> int:
    """Edit distance via the full DP matrix (no row compression)."""
    rows, cols = len(a) + 1, len(b) + 1
    matrix = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        matrix[i][0] = i
    for j in range(cols):
        matrix[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            matrix[i][j] = min(
                matrix[i - 1][j] + 1,
                matrix[i][j - 1] + 1,
                matrix[i - 1][j - 1] + cost,
            )
    return matrix[-1][-1]


def similarity_oracle(a: str, b: str) -> float:
    """Mirror of the documented similarity contract on normalized text."""
    na = " ".join(a.lower().split())
    nb = " ".join(b.lower().split())
    if na == nb:
        return 100.0
    if not na or not nb:
        return 0.0
    return round((1.0 - levenshtein_full_matrix(na, nb) / max(len(na), len(nb))) * 100.0, 4)


def alignment_oracle(pred: list[str], gold: list[str], threshold: float):
    """Exhaustive one-to-one matching under the documented pair ordering.

    Enumerates every valid matching (as a set of indices into the sorted
    candidate pair list) and returns the one that is lexicographically
    smallest in those indices, i.e. the matching that always prefers the
    earliest still-feasible pair.  Practical only for small instances.
    """
    pairs = []
    for gi, gtext in enumerate(gold):
        for pi, ptext in enumerate(pred):
            sim = similarity_oracle(ptext, gtext)
            if sim >= threshold:
                pairs.append((pi, gi, sim))
    pairs.sort(key=lambda t: (-t[2], gold[t[1]], pred[t[0]], t[1], t[0]))

    best: list[int] | None = None

    def feasible(selection: list[int]) -> bool:
        preds = [pairs[i][0] for i in selection]
        golds = [pairs[i][1] for i in selection]
        return len(set(preds)) == len(preds) and len(set(golds)) == len(golds)

    def search(start: int, selection: list[int]):
        nonlocal best
        extended = False
        for i in range(start, len(pairs)):
            if feasible(selection + [i]):
                extended = True
                search(i + 1, selection + [i])
        if not extended:
            if best is None or selection < best:
                best = list(selection)

    search(0, [])
    chosen = best or []
    matched = tuple(pairs[i] for i in chosen)
    used_p = {p for p, _, _ in matched}
    used_g = {g for _, g, _ in matched}
    return (
        matched,
        tuple(i for i in range(len(pred)) if i not in used_p),
        tuple(i for i in range(len(gold)) if i not in used_g),
    )


def extraction_metrics_oracle(reports, threshold: float):
    """Recount the multi-label metrics from scratch in exact arithmetic.

    ``reports`` is a list of (pred_texts, gold_texts).  Alignment comes
    from ``alignment_oracle``; all the counting and averaging below is an
    independent restatement of the documented metric definitions using
    Fractions, converted to float only at the end.
    """
    norm = lambda s: " ".join(s.lower().split())
    label_space = sorted({norm(g) for _, gold in reports for g in gold})

    tp: dict[str, int] = {}
    fp: dict[str, int] = {}
    fn: dict[str, int] = {}
    perfect = 0
    for pred, gold in reports:
        matched, un_pred, un_gold = alignment_oracle(list(pred), list(gold), threshold)
        if not un_pred and not un_gold:
            perfect += 1
        for _, gi, _ in matched:
            tp[norm(gold[gi])] = tp.get(norm(gold[gi]), 0) + 1
        for gi in un_gold:
            fn[norm(gold[gi])] = fn.get(norm(gold[gi]), 0) + 1
        for pi in un_pred:
            best_label, best_sim = "__OUT_OF_VOCAB__", 0.0
            for label in label_space:
                sim = similarity_oracle(pred[pi], label)
                if sim > best_sim:
                    best_sim, best_label = sim, label
            fp[best_label] = fp.get(best_label, 0) + 1

    supported = [l for l in label_space if tp.get(l, 0) + fn.get(l, 0) > 0]
    total_support = sum(tp.get(l, 0) + fn.get(l, 0) for l in supported)

    def prf(label: str) -> tuple[Fraction, Fraction, Fraction]:
        t, f_p, f_n = tp.get(label, 0), fp.get(label, 0), fn.get(label, 0)
        p = Fraction(t, t + f_p) if t + f_p else Fraction(0)
        r = Fraction(t, t + f_n) if t + f_n else Fraction(0)
        f = Fraction(2) * p * r / (p + r) if p + r else Fraction(0)
        return p, r, f

    macro = [Fraction(0)] * 3
    weighted = [Fraction(0)] * 3
    for label in supported:
        values = prf(label)
        for i in range(3):
            macro[i] += values[i] / len(supported)
            weighted[i] += values[i] * Fraction(tp.get(label, 0) + fn.get(label, 0), total_support)

    n = len(reports)
    hamming = Fraction(sum(fp.values()) + sum(fn.values()), max(1, len(label_space)) * n)
    return {
        "precision": (float(macro[0]), float(weighted[0])),
        "recall": (float(macro[1]), float(weighted[1])),
        "f1": (float(macro[2]), float(weighted[2])),
        "subset_accuracy": float(Fraction(perfect, n)),
        "hamming_loss": float(hamming),
        "per_label": {
            label: (tp.get(label, 0), fp.get(label, 0), fn.get(label, 0))
            for label in set(label_space) | set(fp)
            if tp.get(label, 0) + fp.get(label, 0) + fn.get(label, 0) > 0
        },
    }


def categorization_metrics_oracle(pairs: list[tuple[str, str]], keys: tuple[str, ...]):
    """Recount multiclass metrics from (pred, gold) pairs with Fractions."""
    confusion = {g: {p: 0 for p in keys} for g in keys}
    for pred_key, gold_key in pairs:
        confusion[gold_key][pred_key] += 1

    per_class = {}
    supports = {}
    for key in keys:
        t = confusion[key][key]
        f_n = sum(confusion[key].values()) - t
        f_p = sum(confusion[g][key] for g in keys) - t
        p = Fraction(t, t + f_p) if t + f_p else Fraction(0)
        r = Fraction(t, t + f_n) if t + f_n else Fraction(0)
        f = Fraction(2) * p * r / (p + r) if p + r else Fraction(0)
        j = Fraction(t, t + f_p + f_n) if t + f_p + f_n else Fraction(0)
        per_class[key] = (p, r, f, j)
        supports[key] = t + f_n

    supported = [k for k in keys if supports[k] > 0]
    total = sum(supports[k] for k in supported)
    macro = [Fraction(0)] * 4
    weighted = [Fraction(0)] * 4
    for key in supported:
        for i in range(4):
            macro[i] += per_class[key][i] / len(supported)
            weighted[i] += per_class[key][i] * Fraction(supports[key], total)
    return {
        "confusion": confusion,
        "per_class": {k: tuple(float(v) for v in per_class[k]) for k in keys},
        "macro": tuple(float(v) for v in macro),
        "weighted": tuple(float(v) for v in weighted),
    }


def mcnemar_exact_oracle(b: int, c: int) -> Fraction:
    """Closed-form two-sided binomial tail, exact rational arithmetic."""
    n = b + c
    if n == 0:
        return Fraction(1)
    tail = Fraction(0)
    for k in range(min(b, c) + 1):
        tail += Fraction(math.comb(n, k), 2**n)
    return min(Fraction(1), 2 * tail)


def chi2_df1_sf_quadrature(x: float, upper: float = 400.0, steps: int = 400_000) -> float:
    """Chi-square(1) survival by Simpson quadrature of the density.

    Valid for x > 0 (the density's singularity sits at 0, outside the
    integration range).  The truncated tail beyond ``upper`` is far below
    the 1e-6 comparison tolerance.
    """
    if x <= 0:
        return 1.0

    def density(t: float) -> float:
        return math.exp(-t / 2.0) / math.sqrt(2.0 * math.pi * t)

    if steps % 2:
        steps += 1
    h = (upper - x) / steps
    total = density(x) + density(upper)
    for i in range(1, steps):
        total += density(x + i * h) * (4 if i % 2 else 2)
    return total * h / 3.0
