"""Paired significance test on discordant outcomes between two classifiers."""

from __future__ import annotations

import math
from fractions import Fraction

# Below this many discordant pairs the exact binomial form is used;
# at or above it, the chi-square approximation with continuity correction.
EXACT_THRESHOLD = 25


def chi2_df1_sf(x: float) -> float:
    """Survival function of the chi-square distribution with 1 df."""
    if x <= 0:
        return 1.0
    return math.erfc(math.sqrt(x / 2.0))


def mcnemar_test(correct_a: list[bool], correct_b: list[bool]) -> float:
    """Two-sided p-value for paired correct/incorrect outcome vectors.

    With b = |a right, b wrong| and c = |a wrong, b right|: no discordance
    means p = 1; small b+c uses the exact two-sided binomial
    p = min(1, 2 * sum_{k<=min(b,c)} C(b+c, k) / 2^(b+c)); otherwise the
    continuity-corrected chi-square (|b-c|-1)^2 / (b+c) on 1 df.
    """
    if len(correct_a) != len(correct_b):
        raise ValueError(
            f"paired vectors differ in length: {len(correct_a)} vs {len(correct_b)}"
        )
    b = sum(1 for x, y in zip(correct_a, correct_b) if x and not y)
    c = sum(1 for x, y in zip(correct_a, correct_b) if not x and y)
    n = b + c
    if n == 0:
        return 1.0
    if n < EXACT_THRESHOLD:
        k_max = min(b, c)
        tail = sum(Fraction(math.comb(n, k)) for k in range(k_max + 1)) / Fraction(2) ** n
        return float(min(Fraction(1), 2 * tail))
    chi2 = (abs(b - c) - 1) ** 2 / n
    return chi2_df1_sf(chi2)
