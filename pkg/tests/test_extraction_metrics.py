import math
import random

import pytest

from oracles import extraction_metrics_oracle
from radstruct.errors import EmptyInputError
from radstruct.evaluation.extraction import (
    OUT_OF_VOCAB,
    EvaluatedReport,
    extraction_metrics,
)
from radstruct.evaluation.fuzzy import align_concepts


def evaluate(reports, threshold=80):
    evaluated = [
        EvaluatedReport(
            report_id=f"r{i}",
            pred=tuple(pred),
            gold=tuple(gold),
            alignment=align_concepts(list(pred), list(gold), threshold),
        )
        for i, (pred, gold) in enumerate(reports)
    ]
    return extraction_metrics(evaluated)


def test_perfect_predictions():
    reports = [
        (["pleural effusion"], ["pleural effusion"]),
        (["cardiomegaly", "pneumothorax"], ["cardiomegaly", "pneumothorax"]),
        ([], []),
    ]
    metrics = evaluate(reports)
    assert metrics.precision == (1.0, 1.0)
    assert metrics.recall == (1.0, 1.0)
    assert metrics.f1 == (1.0, 1.0)
    assert metrics.subset_accuracy == 1.0
    assert metrics.hamming_loss == 0.0
    assert metrics.n_samples == 3
    assert metrics.label_space_size == 3


def test_two_report_worked_example():
    # gold {a, b} pred {a}; gold {c} pred {c, b}: the stray "b" is a false
    # positive attributed to label "b", which also carries a false negative.
    reports = [(["a"], ["a", "b"]), (["c", "b"], ["c"])]
    metrics = evaluate(reports)
    expected = extraction_metrics_oracle(reports, 80)
    assert metrics.per_label["a"].tp == 1
    assert metrics.per_label["b"].fp == 1
    assert metrics.per_label["b"].fn == 1
    assert metrics.per_label["c"].tp == 1
    assert metrics.precision[0] == pytest.approx(expected["precision"][0], abs=1e-12)
    assert metrics.precision[0] == pytest.approx(2 / 3, abs=1e-12)
    assert metrics.recall[0] == pytest.approx(2 / 3, abs=1e-12)
    assert metrics.subset_accuracy == 0.0
    assert metrics.hamming_loss == pytest.approx(2 / 6, abs=1e-12)


def test_all_empty_predictions_policy():
    reports = [([], ["a", "b"]), ([], ["c"])]
    metrics = evaluate(reports)
    assert metrics.precision == (0.0, 0.0)
    assert metrics.recall == (0.0, 0.0)
    assert metrics.subset_accuracy == 0.0
    assert metrics.hamming_loss == pytest.approx(3 / 6, abs=1e-12)


def test_out_of_vocab_attribution():
    # a prediction with zero similarity to every gold label lands on the
    # reserved label: counted in hamming loss, excluded from averages.
    reports = [(["zzzz", "aaaa"], ["aaaa"])]
    metrics = evaluate(reports)
    assert metrics.per_label[OUT_OF_VOCAB].fp == 1
    assert metrics.per_label["aaaa"].tp == 1
    assert metrics.precision == (1.0, 1.0)
    assert metrics.hamming_loss == pytest.approx(1 / 1, abs=1e-12)


def test_fp_attribution_most_similar_label():
    # "opacities" missed the gold of its own report but is closest to the
    # corpus label "opacity", which absorbs the false positive.
    reports = [(["opacities"], ["cardiomegaly"]), (["opacity"], ["opacity"])]
    metrics = evaluate(reports)
    assert metrics.per_label["opacity"].fp == 1
    assert metrics.per_label["cardiomegaly"].fn == 1


def test_empty_corpus_rejected():
    with pytest.raises(EmptyInputError):
        extraction_metrics([])


def test_f1_is_harmonic_mean_per_label():
    reports = [(["a", "b", "x"], ["a", "b", "c"]), (["a"], ["a", "b"])]
    metrics = evaluate(reports)
    for label, counts in metrics.per_label.items():
        p = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
        r = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= f <= 1.0


def random_corpus(rng):
    vocabulary = ["effusion", "effusions", "opacity", "opacities", "edema",
                  "mass", "nodule", "cardiomegaly", "fracture", "zz"]
    n_reports = rng.randrange(1, 6)
    reports = []
    for _ in range(n_reports):
        gold = rng.sample(vocabulary, rng.randrange(0, 4))
        pred = rng.sample(vocabulary, rng.randrange(0, 4))
        reports.append((pred, gold))
    return reports


def test_matches_counting_oracle_on_random_corpora():
    rng = random.Random(1234)
    for _ in range(120):
        reports = random_corpus(rng)
        threshold = rng.choice([70, 80, 90])
        evaluated = [
            EvaluatedReport(
                report_id=str(i),
                pred=tuple(pred),
                gold=tuple(gold),
                alignment=align_concepts(list(pred), list(gold), threshold),
            )
            for i, (pred, gold) in enumerate(reports)
        ]
        metrics = extraction_metrics(evaluated)
        expected = extraction_metrics_oracle(reports, threshold)
        for field in ("precision", "recall", "f1"):
            got = getattr(metrics, field)
            assert math.isclose(got[0], expected[field][0], abs_tol=1e-12)
            assert math.isclose(got[1], expected[field][1], abs_tol=1e-12)
        assert math.isclose(metrics.subset_accuracy, expected["subset_accuracy"], abs_tol=1e-12)
        assert math.isclose(metrics.hamming_loss, expected["hamming_loss"], abs_tol=1e-12)


def test_hamming_zero_iff_subset_accuracy_one():
    rng = random.Random(77)
    for _ in range(80):
        reports = random_corpus(rng)
        metrics = evaluate(reports)
        if metrics.hamming_loss == 0.0:
            assert metrics.subset_accuracy == 1.0
        if metrics.subset_accuracy == 1.0:
            assert metrics.hamming_loss == 0.0
