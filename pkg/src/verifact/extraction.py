"""Turning a (prompt, response) pair into verifiable claims.

KB facts, math calculations, and citations are extracted by prompting the
model with the shipped templates; code snippets are parsed directly from
fenced blocks, no model involved.
"""

from __future__ import annotations

import logging
import re

from .gateway import ChatRequest, LlmGateway, MalformedOutput, chat_json
from .models import Citation, CodeSnippet, KbFact, MathCalc
from .templates import render

logger = logging.getLogger(__name__)

KB_CLAIM_WORD_BOUND = 15

_FENCE_RE = re.compile(
    r"^[ \t]*```[^\n]*\n(.*?)(?:^[ \t]*```[ \t]*$|\Z)",
    re.MULTILINE | re.DOTALL,
)
_FENCE_OPENER_RE = re.compile(r"^[ \t]*```", re.MULTILINE)


def extract_kb_claims(gateway: LlmGateway, text: str) -> list[KbFact]:
    """Coreference-resolved atomic claims, in the model's output order.

    The 15-word bound is advisory: oversized claims are logged and kept.
    Malformed model output (after retries) yields an empty list.
    """
    if not text.strip():
        return []
    prompt = render("extraction/kbqa.txt", input_text=text)
    try:
        items = chat_json(
            gateway, ChatRequest(user=prompt), "list_of_objects", required_keys=["claim"]
        )
    except MalformedOutput as exc:
        logger.warning("kb claim extraction failed: %s", exc)
        return []
    claims = [KbFact(statement=str(item["claim"])) for item in items]
    for claim in claims:
        if claim.word_count() > KB_CLAIM_WORD_BOUND:
            logger.info(
                "claim exceeds %d-word guidance (%d words): %r",
                KB_CLAIM_WORD_BOUND,
                claim.word_count(),
                claim.statement,
            )
    return claims


def extract_code_claims(text: str) -> list[CodeSnippet]:
    """Each fenced block is one claim; a fenceless response is itself the claim.

    Empty fenced blocks are dropped.
    """
    if not text.strip():
        return []
    if not _FENCE_OPENER_RE.search(text):
        return [CodeSnippet(code=text)]
    blocks = [match.group(1) for match in _FENCE_RE.finditer(text)]
    blocks = [b[:-1] if b.endswith("\n") else b for b in blocks]
    return [CodeSnippet(code=block) for block in blocks if block.strip()]


def extract_math_claims(gateway: LlmGateway, question: str, solution: str) -> list[MathCalc]:
    """(calculation, calculated_answer) pairs from a step-by-step solution.

    Expressions are kept verbatim; normalization and variable detection are
    the evaluator's job.
    """
    if not solution.strip():
        return []
    prompt = render("extraction/math.txt", input_question=question, input_solution=solution)
    try:
        items = chat_json(
            gateway,
            ChatRequest(user=prompt),
            "list_of_objects",
            required_keys=["math_calculation", "calculated_answer"],
        )
    except MalformedOutput as exc:
        logger.warning("math claim extraction failed: %s", exc)
        return []
    return [
        MathCalc(
            calculation=str(item["math_calculation"]),
            calculated_answer=str(item["calculated_answer"]),
        )
        for item in items
    ]


def extract_citation_claims(gateway: LlmGateway, text: str) -> list[Citation]:
    """One claim per cited paper; entries with unusable years are dropped and logged."""
    if not text.strip():
        return []
    prompt = render("extraction/scientific.txt", input_text=text)
    try:
        items = chat_json(
            gateway,
            ChatRequest(user=prompt),
            "list_of_objects",
            required_keys=["paper_title", "paper_author(s)", "paper_pub_year"],
        )
    except MalformedOutput as exc:
        logger.warning("citation extraction failed: %s", exc)
        return []
    claims = []
    for item in items:
        raw_year = item["paper_pub_year"]
        try:
            year = int(str(raw_year).strip())
            claims.append(
                Citation(
                    title=str(item["paper_title"]),
                    year=year,
                    authors=str(item["paper_author(s)"]),
                )
            )
        except ValueError as exc:
            logger.warning(
                "dropping citation with invalid year %r (%s): %r",
                raw_year,
                exc,
                item.get("paper_title"),
            )
    return claims
