import math
import random

import pytest

from oracles import chi2_df1_sf_quadrature, mcnemar_exact_oracle
from radstruct.evaluation.mcnemar import chi2_df1_sf, mcnemar_test


def vectors_from_counts(a: int, b: int, c: int, d: int):
    """Build paired correctness vectors with the given 2x2 cell counts."""
    correct_a = [True] * a + [True] * b + [False] * c + [False] * d
    correct_b = [True] * a + [False] * b + [True] * c + [False] * d
    return correct_a, correct_b


def test_identical_vectors_give_one():
    va, vb = vectors_from_counts(a=10, b=0, c=0, d=3)
    assert mcnemar_test(va, vb) == 1.0


def test_exact_branch_b1_c9():
    va, vb = vectors_from_counts(a=5, b=1, c=9, d=2)
    p = mcnemar_test(va, vb)
    assert math.isclose(p, 22 / 1024, abs_tol=1e-15)
    assert math.isclose(p, float(mcnemar_exact_oracle(1, 9)), abs_tol=1e-15)


def test_asymptotic_branch_b40_c60():
    va, vb = vectors_from_counts(a=0, b=40, c=60, d=0)
    p = mcnemar_test(va, vb)
    # chi-square = (|40-60|-1)^2 / 100 = 3.61
    assert math.isclose(p, chi2_df1_sf_quadrature(3.61), abs_tol=1e-6)
    assert round(p, 4) == 0.0574


def test_exact_branch_matches_closed_form_sweep():
    for b in range(0, 13):
        for c in range(0, 13):
            if b + c == 0 or b + c >= 25:
                continue
            va, vb = vectors_from_counts(a=2, b=b, c=c, d=1)
            p = mcnemar_test(va, vb)
            assert math.isclose(p, float(mcnemar_exact_oracle(b, c)), abs_tol=1e-12)


def test_asymptotic_branch_matches_quadrature():
    for b, c in [(13, 12), (30, 10), (25, 25), (100, 55), (12, 88)]:
        va, vb = vectors_from_counts(a=0, b=b, c=c, d=0)
        chi2 = (abs(b - c) - 1) ** 2 / (b + c)
        assert math.isclose(mcnemar_test(va, vb), chi2_df1_sf_quadrature(chi2), abs_tol=1e-6)


def test_symmetry_under_model_swap():
    rng = random.Random(2)
    for _ in range(50):
        n = rng.randrange(1, 120)
        va = [rng.random() < 0.6 for _ in range(n)]
        vb = [rng.random() < 0.6 for _ in range(n)]
        assert mcnemar_test(va, vb) == mcnemar_test(vb, va)


def test_concordant_pairs_do_not_change_p():
    va, vb = vectors_from_counts(a=0, b=3, c=7, d=0)
    base = mcnemar_test(va, vb)
    padded_a, padded_b = vectors_from_counts(a=50, b=3, c=7, d=40)
    assert mcnemar_test(padded_a, padded_b) == base


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        mcnemar_test([True, False], [True])


def test_p_value_range():
    rng = random.Random(8)
    for _ in range(100):
        n = rng.randrange(1, 80)
        va = [rng.random() < 0.5 for _ in range(n)]
        vb = [rng.random() < 0.5 for _ in range(n)]
        assert 0.0 <= mcnemar_test(va, vb) <= 1.0


def test_survival_function_edges():
    assert chi2_df1_sf(0.0) == 1.0
    assert chi2_df1_sf(-1.0) == 1.0
    assert 0.0 < chi2_df1_sf(10.0) < 0.002
