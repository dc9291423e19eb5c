"""N-gram overlap and LCS similarity for extraction-quality scoring.

Tokenization is fixed to lowercased alphanumeric tokens so scores do not
depend on punctuation or casing.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RougeScores:
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> RougeScores:
    cand = _ngrams(tokenize(candidate), n)
    ref = _ngrams(tokenize(reference), n)
    overlap = sum((cand & ref).values())
    total_cand = sum(cand.values())
    total_ref = sum(ref.values())
    precision = overlap / total_cand if total_cand else 0.0
    recall = overlap / total_ref if total_ref else 0.0
    return RougeScores(precision, recall, _f1(precision, recall))


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(prev[j - 1] + 1)
            else:
                current.append(max(prev[j], current[j - 1]))
        prev = current
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> RougeScores:
    cand = tokenize(candidate)
    ref = tokenize(reference)
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand) if cand else 0.0
    recall = lcs / len(ref) if ref else 0.0
    return RougeScores(precision, recall, _f1(precision, recall))


def rouge_scores(candidate: str, reference: str, variant: str) -> RougeScores:
    """variant is one of "1", "2", "L" (case-insensitive)."""
    key = str(variant).lower()
    if key == "1":
        return rouge_n(candidate, reference, 1)
    if key == "2":
        return rouge_n(candidate, reference, 2)
    if key == "l":
        return rouge_l(candidate, reference)
    raise ValueError(f"unknown rouge variant: {variant!r}")


def rouge_metric(variant: str, component: str = "f1"):
    """A (candidate, reference) -> float similarity for the extraction scorer."""
    if component not in ("precision", "recall", "f1"):
        raise ValueError(f"unknown score component: {component!r}")

    def metric(candidate: str, reference: str) -> float:
        return getattr(rouge_scores(candidate, reference, variant), component)

    return metric
