"""Converting claims into tool queries.

KB facts become search-engine queries, code prompts become simulated test
inputs plus independently sampled candidate solutions, math calculations
become check programs (LLM backend only), and citations pass their title
through unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .gateway import ChatRequest, LlmGateway, MalformedOutput, chat_json
from .models import (
    CandidateSolution,
    Citation,
    KbFact,
    MathCalc,
    MathCheck,
    Prompt,
    SearchQuery,
    TestInput,
)
from .templates import render

logger = logging.getLogger(__name__)

SOLUTION_SAMPLING_TEMPERATURE = 1.0


class QueryGenerationError(RuntimeError):
    """Query generation failed in a way that makes the claim unverifiable."""


@dataclass(frozen=True)
class QueryGenConfig:
    num_search_queries: int = 2
    num_test_inputs: int = 3
    num_candidate_solutions: int = 3

    def __post_init__(self) -> None:
        for name in ("num_search_queries", "num_test_inputs", "num_candidate_solutions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class SearchQueryResult:
    queries: tuple[SearchQuery, ...]
    fallback_used: bool = False


def gen_search_queries(gateway: LlmGateway, claim: KbFact, n: int = 2) -> SearchQueryResult:
    """Exactly n search queries; falls back to the claim text itself when the
    model output stays malformed."""
    prompt = render("query/kbqa.txt", input=claim.statement)
    try:
        texts = chat_json(gateway, ChatRequest(user=prompt), "list_of_strings")
    except MalformedOutput as exc:
        logger.warning("search query generation fell back to claim text: %s", exc)
        return SearchQueryResult(
            queries=(SearchQuery(claim_id=claim.id, text=claim.statement),),
            fallback_used=True,
        )
    texts = [t for t in texts if t.strip()]
    if not texts:
        return SearchQueryResult(
            queries=(SearchQuery(claim_id=claim.id, text=claim.statement),),
            fallback_used=True,
        )
    if len(texts) > n:
        texts = texts[:n]
    while len(texts) < n:  # keep the cardinality contract even on short output
        texts.append(claim.statement)
    return SearchQueryResult(
        queries=tuple(SearchQuery(claim_id=claim.id, text=t) for t in texts)
    )


def _testcase_prompt(question: str, entry_point: str, k: int) -> str:
    if k == 3:
        return render("query/code_testcases.txt", input_question=question, entry_point=entry_point)
    # non-default cardinality: build a k-call variant with the same wording
    keys = ", ".join(f'"function_call_{i}"' for i in range(1, k + 1))
    body = ",\n".join(
        f'  "function_call_{i}": "Function call number {i} for function {entry_point}. '
        'Do not include anything else."'
        for i in range(1, k + 1)
    )
    return (
        f"Please generate {k} distinct function calls for the given coding question to test "
        f"the functionality of the function {entry_point} that attempts to solve the provided "
        "coding question.\n\n"
        f"Your response must be a dictionary with {k} keys - {keys}, which correspond to the "
        f"{k} distinct function calls for function {entry_point}.\n"
        "The following is the given coding question -\n\n"
        f"[coding question]: {question}\n\n"
        "You MUST only respond in the format as described below. DO NOT RESPOND WITH ANYTHING "
        "ELSE. ADDING ANY OTHER EXTRA NOTES THAT VIOLATE THE RESPONSE FORMAT IS BANNED. "
        "START YOUR RESPONSE WITH '{'.\n\n"
        "[response format]:\n{\n" + body + "\n}\n"
    )


def gen_test_inputs(gateway: LlmGateway, prompt: Prompt, claim_id: str, k: int = 3) -> list[TestInput]:
    """k call expressions invoking the prompt's entry point.

    Malformed output after retries is a hard failure: the claim cannot be
    verified without inputs.
    """
    if prompt.entry_point is None:
        raise QueryGenerationError("test input generation needs a code prompt with entry_point")
    user = _testcase_prompt(prompt.text, prompt.entry_point, k)
    keys = [f"function_call_{i}" for i in range(1, k + 1)]
    try:
        obj = chat_json(gateway, ChatRequest(user=user), "object", required_keys=keys)
    except MalformedOutput as exc:
        raise QueryGenerationError(f"test input generation failed: {exc}") from exc
    return [TestInput(claim_id=claim_id, call_expression=str(obj[key])) for key in keys]


def gen_candidate_solutions(
    gateway: LlmGateway, prompt: Prompt, claim_id: str, k: int = 3
) -> list[CandidateSolution]:
    """k independently sampled solutions (one chat call each, temperature > 0).

    Samples whose output stays malformed are dropped; zero surviving
    solutions is a hard failure.
    """
    user = render(
        "query/code_solution.txt",
        input_question=prompt.text,
        entry_point=prompt.entry_point or "",
    )
    solutions: list[CandidateSolution] = []
    for index in range(k):
        request = ChatRequest(user=user, temperature=SOLUTION_SAMPLING_TEMPERATURE)
        try:
            obj = chat_json(gateway, request, "object", required_keys=["python_solution"])
        except MalformedOutput as exc:
            logger.warning("dropping malformed candidate solution sample %d: %s", index + 1, exc)
            continue
        solutions.append(CandidateSolution(claim_id=claim_id, code=str(obj["python_solution"])))
    if not solutions:
        raise QueryGenerationError("no candidate solution survived sampling")
    return solutions


def gen_math_check(gateway: LlmGateway, claim: MathCalc) -> MathCheck:
    """A one-line program printing True/False; used by the LLM math backend only."""
    user = render(
        "query/math.txt",
        math_calculation=claim.calculation,
        calculated_answer=claim.calculated_answer,
    )
    try:
        obj = chat_json(gateway, ChatRequest(user=user), "object", required_keys=["python_snippet"])
    except MalformedOutput as exc:
        raise QueryGenerationError(f"math check generation failed: {exc}") from exc
    return MathCheck(claim_id=claim.id, program=str(obj["python_snippet"]))


def gen_scholar_query(claim: Citation) -> str:
    """Scientific query generation is the identity on the title field."""
    return claim.title
