"""Agreement verification: claim verdicts per scenario, plus the
tool-free self-check baseline.

Code claims are judged by majority vote over independently generated
solutions (the solution under test never votes); citations by exact
normalized matching against the scholar record; math claims by the
arithmetic evidence; KB facts by a reasoning model over search snippets.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .gateway import ChatRequest, LlmGateway, MalformedOutput, chat_json, coerce_bool
from .models import (
    ArithmeticResult,
    Citation,
    ClaimVerdict,
    ExecStatus,
    ExecutionMatrix,
    ExecutionOutput,
    KbFact,
    MathCalc,
    ScholarRecord,
    Task,
    aggregate_response_label,
    normalize_title,
)
from .templates import load_template, render

logger = logging.getLogger(__name__)

UNDETERMINED_FLAG = "undetermined"
NO_EVIDENCE_FLAG = "no_evidence"
VERIFICATION_FAILED_FLAG = "verification_failed"

TAG_WRONG_TITLE = "wrong_paper_title"
TAG_WRONG_AUTHORS = "wrong_paper_author(s)"
TAG_WRONG_YEAR = "wrong_paper_pub_year"


def _clean_optional(value) -> Optional[str]:
    if value is None:
        return None
    text = str(value)
    return None if text.strip().lower() in ("none", "") else text


def _error_for(factuality: bool, raw_error, reasoning: str) -> Optional[str]:
    """Keep the verdict well-formed: error is None iff factual."""
    if factuality:
        return None
    return _clean_optional(raw_error) or (reasoning or "unspecified factual error")


# --- KB ------------------------------------------------------------------------

def verify_kb_claim(gateway: LlmGateway, claim: KbFact, evidence: Sequence) -> ClaimVerdict:
    """Reason over the collected snippets; empty evidence is allowed (the
    model falls back to its priors and the verdict is flagged)."""
    snippets = [e.text for e in evidence]
    prompt = render(
        "verify/kbqa.txt",
        claim=claim.statement,
        evidence=json.dumps(snippets, ensure_ascii=False),
    )
    flags = () if snippets else (NO_EVIDENCE_FLAG,)
    try:
        obj = chat_json(
            gateway,
            ChatRequest(user=prompt),
            "object",
            required_keys=["reasoning", "factuality"],
        )
        factuality = coerce_bool(obj["factuality"])
    except MalformedOutput as exc:
        logger.warning("kb verification failed for %r: %s", claim.statement, exc)
        return ClaimVerdict(
            claim_id=claim.id,
            factuality=False,
            reasoning="verification-failed",
            error=str(exc),
            flags=flags + (VERIFICATION_FAILED_FLAG,),
        )
    reasoning = str(obj.get("reasoning", ""))
    return ClaimVerdict(
        claim_id=claim.id,
        factuality=factuality,
        reasoning=reasoning,
        error=_error_for(factuality, obj.get("error"), reasoning),
        correction=_clean_optional(obj.get("correction")),
        flags=flags,
    )


# --- code ------------------------------------------------------------------------

@dataclass(frozen=True)
class VoteOutcome:
    """Result of one test input's vote over the generated solutions."""

    pseudo_golden: Optional[str]
    decisive: bool
    under_test_matches: Optional[bool]


def _vote_row(row: Sequence[ExecutionOutput]) -> VoteOutcome:
    generated = row[:-1]
    under_test = row[-1]
    # non-ok outputs never equal anything, including each other
    counts: dict = {}
    for index, cell in enumerate(generated):
        key = ("ok", cell.value) if cell.status == ExecStatus.OK else ("bad", index)
        counts[key] = counts.get(key, 0) + 1
    ordered = sorted(counts.values(), reverse=True)
    strict_plurality = bool(ordered) and (len(ordered) == 1 or ordered[0] > ordered[1])
    if not strict_plurality:
        return VoteOutcome(pseudo_golden=None, decisive=False, under_test_matches=None)
    winner = max(counts, key=counts.get)
    if winner[0] != "ok":
        # a crash cannot serve as an expected output, but the row is decisive
        return VoteOutcome(pseudo_golden=None, decisive=True, under_test_matches=False)
    golden = winner[1]
    matches = under_test.status == ExecStatus.OK and under_test.value == golden
    return VoteOutcome(pseudo_golden=golden, decisive=True, under_test_matches=matches)


def verify_code_claim(matrix: ExecutionMatrix, claim_id: str = "") -> ClaimVerdict:
    """Majority vote per test input over the generated solutions only.

    True iff the solution under test matches the pseudo-golden output on
    every decisive input and at least one input is decisive; a fully
    indecisive matrix gets the benefit of the doubt with a flag.
    """
    outcomes = [_vote_row(row) for row in matrix.outputs]
    decisive = [o for o in outcomes if o.decisive]
    resolved_claim_id = claim_id or matrix.outputs[0][0].claim_id
    if not decisive:
        return ClaimVerdict(
            claim_id=resolved_claim_id,
            factuality=True,
            reasoning="no test input produced a plurality among generated solutions",
            flags=(UNDETERMINED_FLAG,),
        )
    mismatches = [
        (matrix.inputs[i], o.pseudo_golden)
        for i, o in enumerate(outcomes)
        if o.decisive and not o.under_test_matches
    ]
    if mismatches:
        described = "; ".join(
            f"{call} expected {golden!r}" if golden is not None else f"{call} had no usable expected output"
            for call, golden in mismatches
        )
        return ClaimVerdict(
            claim_id=resolved_claim_id,
            factuality=False,
            reasoning=f"output disagreed with the voted expected value: {described}",
            error=described,
        )
    return ClaimVerdict(
        claim_id=resolved_claim_id,
        factuality=True,
        reasoning=(
            f"matched the voted expected output on {len(decisive)} of "
            f"{len(outcomes)} test inputs"
        ),
    )


# --- math -------------------------------------------------------------------------

def verify_math_claims(
    results: Sequence[tuple[MathCalc, ArithmeticResult]],
) -> tuple[list[ClaimVerdict], bool]:
    """Claim verdict equals the arithmetic match; the response is factual iff
    every calculation checked out."""
    verdicts = []
    for claim, result in results:
        if result.matched:
            verdicts.append(
                ClaimVerdict(
                    claim_id=claim.id,
                    factuality=True,
                    reasoning=f"{claim.calculation} evaluates to {claim.calculated_answer}",
                )
            )
        else:
            verdicts.append(
                ClaimVerdict(
                    claim_id=claim.id,
                    factuality=False,
                    reasoning=f"{claim.calculation} does not evaluate to {claim.calculated_answer}",
                    error=f"stated answer {claim.calculated_answer} does not match the calculation",
                )
            )
    return verdicts, aggregate_response_label(verdicts)


# --- scientific --------------------------------------------------------------------

_ET_AL_RE = re.compile(r"\bet\.?\s*al\.?", re.IGNORECASE)
_AUTHOR_SPLIT_RE = re.compile(r",|;|&|\band\b", re.IGNORECASE)
_ALPHA_TOKEN_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


def claimed_last_names(claimed: str) -> list[str]:
    """Last names from a free-form author string: final alphabetic token of
    each name unit after splitting on ',', 'and', '&'; et-al markers dropped."""
    text = _ET_AL_RE.sub(" ", claimed)
    names = []
    for unit in _AUTHOR_SPLIT_RE.split(text):
        tokens = _ALPHA_TOKEN_RE.findall(unit)
        if tokens:
            names.append(tokens[-1].lower())
    return names


def match_authors_subset(claimed: str, retrieved: Sequence[str]) -> bool:
    """True iff every claimed last name appears as a token in some retrieved
    author string (case-insensitive). Empty claimed string is False."""
    names = claimed_last_names(claimed)
    if not names:
        return False
    retrieved_tokens = set()
    for author in retrieved:
        retrieved_tokens.update(t.lower() for t in _ALPHA_TOKEN_RE.findall(author))
    return all(name in retrieved_tokens for name in names)


def match_authors_llm(gateway: LlmGateway, claimed: str, retrieved: Sequence[str]) -> bool:
    """Optional model-backed author matching using the shipped prompt."""
    prompt = render(
        "verify/authors.txt",
        string1=json.dumps(claimed, ensure_ascii=False),
        list2=json.dumps(list(retrieved), ensure_ascii=False),
    )
    try:
        obj = chat_json(gateway, ChatRequest(user=prompt), "object", required_keys=["factuality"])
        return coerce_bool(obj["factuality"])
    except MalformedOutput as exc:
        logger.warning("author matching fell back to deterministic backend: %s", exc)
        return match_authors_subset(claimed, retrieved)


def verify_citation_claim(
    claim: Citation,
    record: ScholarRecord,
    gateway: Optional[LlmGateway] = None,
    author_backend: str = "deterministic",
) -> ClaimVerdict:
    """Exact normalized title match, integer year match, author-subset match;
    error_tags lists exactly the failed fields."""
    title_ok = normalize_title(claim.title) == normalize_title(record.title)
    year_ok = int(claim.year) == int(record.year)
    if author_backend == "llm" and gateway is not None:
        authors_ok = match_authors_llm(gateway, claim.authors, record.authors)
    else:
        authors_ok = match_authors_subset(claim.authors, record.authors)
    tags = []
    if not title_ok:
        tags.append(TAG_WRONG_TITLE)
    if not authors_ok:
        tags.append(TAG_WRONG_AUTHORS)
    if not year_ok:
        tags.append(TAG_WRONG_YEAR)
    factuality = not tags
    retrieved_desc = f"{record.title!r} ({record.year}) by {', '.join(record.authors)}"
    return ClaimVerdict(
        claim_id=claim.id,
        factuality=factuality,
        reasoning=(
            f"retrieved record {retrieved_desc} "
            + ("matches the citation" if factuality else f"fails: {', '.join(tags)}")
        ),
        error=None if factuality else f"citation fields do not match: {', '.join(tags)}",
        error_tags=tuple(tags),
    )


def citation_not_found_verdict(claim: Citation) -> ClaimVerdict:
    """A title with no scholar result is treated as a wrong title."""
    return ClaimVerdict(
        claim_id=claim.id,
        factuality=False,
        reasoning=f"no scholar result found for title {claim.title!r}",
        error="cited paper could not be found by its title",
        error_tags=(TAG_WRONG_TITLE,),
    )


# --- self-check baseline --------------------------------------------------------

def self_check(
    gateway: LlmGateway, task: Task, unit_text: str, shots: int = 0, claim_id: str = ""
) -> ClaimVerdict:
    """Judge a claim or response with no tool evidence; shots is 0 or 3 (the
    3-shot variant prepends the shipped demonstrations)."""
    if shots not in (0, 3):
        raise ValueError("self_check supports 0 or 3 shots")
    if shots == 3:
        demos = load_template(f"demos/{task.value}.txt").strip()
        demonstrations = f"\nHere are three examples:\n\n{demos}\n"
    else:
        demonstrations = ""
    prompt = render(
        f"verify/selfcheck_{task.value}.txt",
        demonstrations=demonstrations,
        input=unit_text,
    )
    try:
        obj = chat_json(
            gateway, ChatRequest(user=prompt), "object", required_keys=["reasoning", "factuality"]
        )
        factuality = coerce_bool(obj["factuality"])
    except MalformedOutput as exc:
        logger.warning("self-check failed: %s", exc)
        return ClaimVerdict(
            claim_id=claim_id,
            factuality=False,
            reasoning="verification-failed",
            error=str(exc),
            flags=(VERIFICATION_FAILED_FLAG,),
        )
    reasoning = str(obj.get("reasoning", ""))
    return ClaimVerdict(
        claim_id=claim_id,
        factuality=factuality,
        reasoning=reasoning,
        error=_error_for(factuality, obj.get("error"), reasoning),
        correction=_clean_optional(obj.get("correction")),
    )
