import math
import random

import pytest

from oracles import categorization_metrics_oracle
from radstruct.errors import EmptyInputError
from radstruct.evaluation.categorization import categorization_metrics
from radstruct.protocol import load_default_schema

SCHEMA = load_default_schema()


def test_all_correct_pairs():
    pairs = [("A", "A"), ("B", "B"), ("F", "F"), ("B", "B")]
    report = categorization_metrics(pairs, SCHEMA)
    assert report.macro == (1.0, 1.0, 1.0, 1.0)
    assert report.weighted == (1.0, 1.0, 1.0, 1.0)
    assert report.confusion["B"]["B"] == 2
    assert sum(sum(row.values()) for row in report.confusion.values()) == 4


def test_worked_confusion_example():
    # (pred, gold): gold B predicted C lands in row B, column C.
    pairs = [("B", "B"), ("C", "B"), ("F", "F")]
    report = categorization_metrics(pairs, SCHEMA)
    assert report.confusion["B"]["B"] == 1
    assert report.confusion["B"]["C"] == 1
    assert report.confusion["F"]["F"] == 1
    expected = categorization_metrics_oracle(pairs, SCHEMA.keys)
    assert report.per_class["B"] == pytest.approx(expected["per_class"]["B"], abs=1e-12)
    # class B: tp 1, fn 1, fp 0 -> P 1, R 0.5, F1 2/3, J 0.5
    assert report.per_class["B"] == pytest.approx((1.0, 0.5, 2 / 3, 0.5), abs=1e-12)
    # class C has no gold support: excluded from macro.
    assert report.macro == pytest.approx(expected["macro"], abs=1e-12)


def test_single_gold_class_macro_equals_class_scores():
    pairs = [("B", "B"), ("B", "B"), ("C", "B")]
    report = categorization_metrics(pairs, SCHEMA)
    assert report.macro == pytest.approx(report.per_class["B"], abs=1e-12)


def test_row_sums_equal_gold_counts():
    rng = random.Random(5)
    pairs = [(rng.choice(SCHEMA.keys), rng.choice(SCHEMA.keys)) for _ in range(50)]
    report = categorization_metrics(pairs, SCHEMA)
    for key in SCHEMA.keys:
        gold_count = sum(1 for _, g in pairs if g == key)
        assert sum(report.confusion[key].values()) == gold_count
    assert sum(sum(row.values()) for row in report.confusion.values()) == len(pairs)


def test_invalid_key_rejected():
    with pytest.raises(ValueError):
        categorization_metrics([("Z", "A")], SCHEMA)


def test_empty_input_rejected():
    with pytest.raises(EmptyInputError):
        categorization_metrics([], SCHEMA)


def test_matches_oracle_on_random_pairs():
    rng = random.Random(31337)
    for _ in range(200):
        n = rng.randrange(1, 30)
        pairs = [(rng.choice(SCHEMA.keys), rng.choice(SCHEMA.keys)) for _ in range(n)]
        report = categorization_metrics(pairs, SCHEMA)
        expected = categorization_metrics_oracle(pairs, SCHEMA.keys)
        assert report.confusion == expected["confusion"]
        for i in range(4):
            assert math.isclose(report.macro[i], expected["macro"][i], abs_tol=1e-12)
            assert math.isclose(report.weighted[i], expected["weighted"][i], abs_tol=1e-12)
        for key in SCHEMA.keys:
            for i in range(4):
                assert math.isclose(
                    report.per_class[key][i], expected["per_class"][key][i], abs_tol=1e-12
                )
