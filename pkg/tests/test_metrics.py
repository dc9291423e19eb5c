import json
import random
from pathlib import Path

import pytest

from verifact.metrics import (
    compute_prf,
    score_claim_extraction,
    weighted_claim_accuracy,
)
from verifact.rouge import rouge_metric

DATA_DIR = Path(__file__).parent / "data"


def test_compute_prf_all_correct():
    result = compute_prf([True, True, True], [True, True, True])
    assert (result.accuracy, result.recall, result.precision, result.f1) == (1, 1, 1, 1)


def test_compute_prf_known_f1():
    # P=0.9321, R=0.8531 -> F1=0.8909
    assert 2 * 0.9321 * 0.8531 / (0.9321 + 0.8531) == pytest.approx(0.8909, abs=5e-5)
    preds = [True, False, True, True]
    golds = [True, True, False, True]
    result = compute_prf(preds, golds)
    assert result.counts.to_dict() == {"tp": 2, "fp": 1, "tn": 0, "fn": 1}
    assert result.precision == pytest.approx(2 / 3)
    assert result.recall == pytest.approx(2 / 3)
    assert result.accuracy == pytest.approx(2 / 4)


def test_compute_prf_degenerate_denominators():
    result = compute_prf([False, False], [False, False])
    assert result.precision == 0.0
    assert result.recall == 0.0
    assert result.f1 == 0.0
    assert "zero_precision_denominator" in result.flags
    assert "zero_recall_denominator" in result.flags


def test_compute_prf_length_mismatch():
    with pytest.raises(ValueError):
        compute_prf([True], [True, False])
    with pytest.raises(ValueError):
        compute_prf([], [])


def test_f1_is_harmonic_mean_and_bounded():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(1, 40)
        preds = [rng.random() < 0.6 for _ in range(n)]
        golds = [rng.random() < 0.6 for _ in range(n)]
        result = compute_prf(preds, golds)
        p, r, f1 = result.precision, result.recall, result.f1
        if p + r > 0:
            assert f1 == pytest.approx(2 * p * r / (p + r))
            assert min(p, r) - 1e-12 <= f1 <= max(p, r) + 1e-12


def test_reference_rows_f1_consistency():
    """Every recorded (P, R, F1) row must satisfy F1 = 2PR/(P+R) within 0.02."""
    rows = json.loads((DATA_DIR / "reference_prf_rows.json").read_text())["rows"]
    assert len(rows) == 24
    for row in rows:
        for level in ("claim", "response"):
            p = row[level]["p"]
            r = row[level]["r"]
            printed = row[level]["f1"]
            recomputed = 2 * p * r / (p + r)
            assert recomputed == pytest.approx(printed, abs=0.02), (
                row["task"], row["llm"], row["method"], level,
            )


# --- extraction similarity scorer -------------------------------------------

def test_score_identity():
    claims = ["the cat sat", "the dog ran"]
    assert score_claim_extraction(claims, claims, rouge_metric("1")) == pytest.approx(1.0)


def test_score_single_match():
    golden = ["alpha beta", "gamma delta", "epsilon zeta"]
    assert score_claim_extraction(["gamma delta"], golden, rouge_metric("1")) == pytest.approx(1.0)


def test_score_empty_inputs_rejected():
    with pytest.raises(ValueError):
        score_claim_extraction([], ["a"], rouge_metric("1"))
    with pytest.raises(ValueError):
        score_claim_extraction(["a"], [], rouge_metric("1"))


def test_score_matches_bruteforce_oracle():
    rng = random.Random(5150)
    words = "red green blue fast slow cat dog bird tree rock".split()

    def text():
        return " ".join(rng.choice(words) for _ in range(rng.randint(1, 6)))

    metric = rouge_metric("1")
    for _ in range(1000):
        extracted = [text() for _ in range(rng.randint(1, 5))]
        golden = [text() for _ in range(rng.randint(1, 5))]
        # independent naive double loop
        total = 0.0
        for c in extracted:
            best = 0.0
            for g in golden:
                sim = metric(c, g)
                if sim > best:
                    best = sim
            total += best
        expected = total / len(extracted)
        assert score_claim_extraction(extracted, golden, metric) == expected


# --- weighted scenario accuracy ----------------------------------------------

def test_weighted_accuracy_uniform_identity():
    for a in (0.0, 0.3, 1.0):
        assert weighted_claim_accuracy(a, a, a, a) == pytest.approx(a)


def test_weighted_accuracy_spot_values():
    assert weighted_claim_accuracy(1, 0, 0, 0) == pytest.approx(0.5)
    assert weighted_claim_accuracy(0.8, 0.6, 0.6, 0.6) == pytest.approx(0.7)
    assert weighted_claim_accuracy(0, 1, 0, 0) == pytest.approx(1 / 6)


def test_weighted_accuracy_monotone_and_symmetric():
    rng = random.Random(88)
    for _ in range(1000):
        args = [rng.random() for _ in range(4)]
        base = weighted_claim_accuracy(*args)
        # bumping any argument never lowers the result
        for i in range(4):
            bumped = list(args)
            bumped[i] = min(1.0, bumped[i] + rng.random() * (1 - bumped[i]))
            assert weighted_claim_accuracy(*bumped) >= base - 1e-12
        # the three 1/6-weighted arguments commute
        k, c, m, s = args
        assert weighted_claim_accuracy(k, m, s, c) == pytest.approx(base)


def test_weighted_accuracy_rejects_out_of_range():
    with pytest.raises(ValueError):
        weighted_claim_accuracy(1.2, 0, 0, 0)
    with pytest.raises(ValueError):
        weighted_claim_accuracy(0, 0, -0.1, 0)
