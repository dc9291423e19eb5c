"""Claim- and response-level evaluation metrics.

The positive class for precision/recall/F1 is "factual" (label True).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class PrfResult:
    accuracy: float
    recall: float
    precision: float
    f1: float
    counts: ConfusionCounts
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "recall": self.recall,
            "precision": self.precision,
            "f1": self.f1,
            "counts": self.counts.to_dict(),
            "flags": list(self.flags),
        }


def compute_prf(preds: Sequence[bool], golds: Sequence[bool]) -> PrfResult:
    """Accuracy, recall, precision, F1 with True as the positive class.

    Zero denominators yield 0.0 and a flag naming the degenerate quantity.
    """
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} golds")
    if not preds:
        raise ValueError("need at least one (prediction, gold) pair")
    tp = sum(1 for p, g in zip(preds, golds) if p and g)
    fp = sum(1 for p, g in zip(preds, golds) if p and not g)
    tn = sum(1 for p, g in zip(preds, golds) if not p and not g)
    fn = sum(1 for p, g in zip(preds, golds) if not p and g)
    counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
    flags: list[str] = []
    accuracy = (tp + tn) / counts.total
    if tp + fp == 0:
        precision = 0.0
        flags.append("zero_precision_denominator")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        flags.append("zero_recall_denominator")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0:
        f1 = 0.0
        flags.append("zero_f1_denominator")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return PrfResult(accuracy, recall, precision, f1, counts, tuple(flags))


def score_claim_extraction(
    extracted: Sequence[str],
    golden: Sequence[str],
    metric: Callable[[str, str], float],
) -> float:
    """Mean over extracted claims of the best similarity to any golden claim."""
    if not extracted or not golden:
        raise ValueError("extraction scoring needs non-empty extracted and golden sets")
    return sum(max(metric(c, g) for g in golden) for c in extracted) / len(extracted)


WEIGHT_KBQA = 3 / 6
WEIGHT_OTHER = 1 / 6


def weighted_claim_accuracy(
    acc_kbqa: float, acc_code: float, acc_math: float, acc_sci: float
) -> float:
    """Scenario accuracies combined 3:1:1:1 (KB-QA carries half the weight)."""
    for name, value in (
        ("kbqa", acc_kbqa),
        ("code", acc_code),
        ("math", acc_math),
        ("scientific", acc_sci),
    ):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} accuracy out of [0, 1]: {value}")
    return WEIGHT_KBQA * acc_kbqa + WEIGHT_OTHER * (acc_code + acc_math + acc_sci)
