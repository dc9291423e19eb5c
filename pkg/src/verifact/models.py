"""Shared value types for the checking pipeline.

Everything here is an immutable value object with a canonical JSON form
(snake_case field names, stable key order), so instances can be hashed,
shipped over the HTTP API, and written to JSONL files interchangeably.
"""

from __future__ import annotations

import hashlib
import json
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Any, ClassVar, Optional, Sequence, Union


class Task(str, Enum):
    KBQA = "kbqa"
    CODE = "code"
    MATH = "math"
    SCIENTIFIC = "scientific"


def canonical_json(value: Any) -> str:
    """Serialize with sorted keys and no whitespace; used for content hashes."""
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def content_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def normalize_title(raw: str) -> str:
    """Canonical form for title comparison.

    Lowercase, Unicode NFKC, internal whitespace collapsed, trailing
    periods (and surrounding whitespace) stripped. Idempotent.
    """
    text = unicodedata.normalize("NFKC", raw).lower()
    text = " ".join(text.split())
    return text.rstrip(" .")


@dataclass(frozen=True)
class Prompt:
    """User query or instruction the response under check was generated from."""

    task: Task
    text: str
    entry_point: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("prompt text must be non-empty")
        if (self.task == Task.CODE) != (self.entry_point is not None):
            raise ValueError("entry_point is required for code prompts and forbidden otherwise")

    def to_dict(self) -> dict:
        return {"task": self.task.value, "text": self.text, "entry_point": self.entry_point}


@dataclass(frozen=True)
class ResponseText:
    """Model-generated long-form output under check."""

    text: str

    def to_dict(self) -> dict:
        return {"text": self.text}


class _ClaimBase:
    """Mixin giving every claim variant a stable content-derived id."""

    variant: ClassVar[str]

    def payload(self) -> dict:
        raise NotImplementedError

    @property
    def id(self) -> str:
        return content_hash([self.variant, self.payload()])[:16]

    def to_dict(self) -> dict:
        return {"id": self.id, "variant": self.variant, **self.payload()}


@dataclass(frozen=True)
class KbFact(_ClaimBase):
    """An atomic, self-contained factual statement."""

    statement: str
    variant: ClassVar[str] = "kb_fact"

    def payload(self) -> dict:
        return {"statement": self.statement}

    def word_count(self) -> int:
        return len(self.statement.split())


@dataclass(frozen=True)
class CodeSnippet(_ClaimBase):
    """A code block whose behaviour is checked by execution."""

    code: str
    variant: ClassVar[str] = "code_snippet"

    def payload(self) -> dict:
        return {"code": self.code}


@dataclass(frozen=True)
class MathCalc(_ClaimBase):
    """A concrete arithmetic step: expression plus the answer stated for it."""

    calculation: str
    calculated_answer: str
    variant: ClassVar[str] = "math_calc"

    def payload(self) -> dict:
        return {"calculation": self.calculation, "calculated_answer": self.calculated_answer}


@dataclass(frozen=True)
class Citation(_ClaimBase):
    """A cited work as a (title, year, authors) tuple."""

    title: str
    year: int
    authors: str
    variant: ClassVar[str] = "citation"

    def __post_init__(self) -> None:
        if not 1000 <= int(self.year) <= 2100:
            raise ValueError(f"citation year out of range: {self.year}")

    def payload(self) -> dict:
        return {"title": self.title, "year": self.year, "authors": self.authors}


Claim = Union[KbFact, CodeSnippet, MathCalc, Citation]

_CLAIM_VARIANTS = {cls.variant: cls for cls in (KbFact, CodeSnippet, MathCalc, Citation)}


def claim_from_dict(data: dict) -> Claim:
    cls = _CLAIM_VARIANTS.get(data.get("variant", ""))
    if cls is None:
        raise ValueError(f"unknown claim variant: {data.get('variant')!r}")
    payload = {k: v for k, v in data.items() if k not in ("id", "variant")}
    return cls(**payload)


def task_for_claim(claim: Claim) -> Task:
    return {
        KbFact: Task.KBQA,
        CodeSnippet: Task.CODE,
        MathCalc: Task.MATH,
        Citation: Task.SCIENTIFIC,
    }[type(claim)]


class _QueryBase:
    variant: ClassVar[str]

    def payload(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"claim_id": self.claim_id, "variant": self.variant, **self.payload()}


@dataclass(frozen=True)
class SearchQuery(_QueryBase):
    claim_id: str
    text: str
    variant: ClassVar[str] = "search_query"

    def payload(self) -> dict:
        return {"text": self.text}


@dataclass(frozen=True)
class TestInput(_QueryBase):
    __test__: ClassVar[bool] = False  # keep pytest from collecting this dataclass

    claim_id: str
    call_expression: str
    variant: ClassVar[str] = "test_input"

    def payload(self) -> dict:
        return {"call_expression": self.call_expression}


@dataclass(frozen=True)
class CandidateSolution(_QueryBase):
    claim_id: str
    code: str
    variant: ClassVar[str] = "candidate_solution"

    def payload(self) -> dict:
        return {"code": self.code}


@dataclass(frozen=True)
class MathCheck(_QueryBase):
    claim_id: str
    program: str
    variant: ClassVar[str] = "math_check"

    def payload(self) -> dict:
        return {"program": self.program}


Query = Union[SearchQuery, TestInput, CandidateSolution, MathCheck]


class SnippetSource(str, Enum):
    ANSWER_BOX = "answer_box"
    KNOWLEDGE_GRAPH = "knowledge_graph"
    ORGANIC = "organic"


class ExecStatus(str, Enum):
    OK = "ok"
    EXCEPTION = "exception"
    TIMEOUT = "timeout"


class _EvidenceBase:
    variant: ClassVar[str]

    def payload(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"claim_id": self.claim_id, "variant": self.variant, **self.payload()}


@dataclass(frozen=True)
class SearchSnippet(_EvidenceBase):
    claim_id: str
    text: str
    source: SnippetSource
    url: Optional[str] = None
    variant: ClassVar[str] = "search_snippet"

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("search snippet text must be non-empty")

    def payload(self) -> dict:
        return {"text": self.text, "source": self.source.value, "url": self.url}


@dataclass(frozen=True)
class ScholarRecord(_EvidenceBase):
    claim_id: str
    title: str
    authors: tuple[str, ...]
    year: int
    variant: ClassVar[str] = "scholar_record"

    def __post_init__(self) -> None:
        if not self.authors:
            raise ValueError("scholar record must list at least one author")

    def payload(self) -> dict:
        return {"title": self.title, "authors": list(self.authors), "year": self.year}


@dataclass(frozen=True)
class ExecutionOutput(_EvidenceBase):
    """One sandbox call result; `value` is the runner's canonical repr."""

    value: str
    status: ExecStatus
    stderr_excerpt: str = ""
    claim_id: str = ""
    variant: ClassVar[str] = "execution_output"

    def payload(self) -> dict:
        return {"value": self.value, "status": self.status.value, "stderr_excerpt": self.stderr_excerpt}


@dataclass(frozen=True)
class ArithmeticResult(_EvidenceBase):
    claim_id: str
    matched: bool
    variant: ClassVar[str] = "arithmetic_result"

    def payload(self) -> dict:
        return {"matched": self.matched}


Evidence = Union[SearchSnippet, ScholarRecord, ExecutionOutput, ArithmeticResult]


@dataclass(frozen=True)
class ClaimVerdict:
    """Boolean factuality label for one claim plus the verifier's metadata."""

    claim_id: str
    factuality: bool
    reasoning: str = ""
    error: Optional[str] = None
    correction: Optional[str] = None
    error_tags: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "factuality": self.factuality,
            "reasoning": self.reasoning,
            "error": self.error,
            "correction": self.correction,
            "error_tags": list(self.error_tags),
            "flags": list(self.flags),
        }


def claim_verdict_from_dict(data: dict) -> ClaimVerdict:
    return ClaimVerdict(
        claim_id=data["claim_id"],
        factuality=bool(data["factuality"]),
        reasoning=data.get("reasoning", ""),
        error=data.get("error"),
        correction=data.get("correction"),
        error_tags=tuple(data.get("error_tags", ())),
        flags=tuple(data.get("flags", ())),
    )


EMPTY_CLAIMS_FLAG = "empty_claims"


def aggregate_response_label(verdicts: Sequence[ClaimVerdict]) -> bool:
    """A response is factual iff no claim in it was judged non-factual.

    The empty list is vacuously true; callers surface that case via the
    `empty_claims` flag on the response verdict.
    """
    return all(v.factuality for v in verdicts)


@dataclass(frozen=True)
class ResponseVerdict:
    factuality: bool
    claim_verdicts: tuple[ClaimVerdict, ...]
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "factuality": self.factuality,
            "claim_verdicts": [v.to_dict() for v in self.claim_verdicts],
            "flags": list(self.flags),
        }


def build_response_verdict(verdicts: Sequence[ClaimVerdict]) -> ResponseVerdict:
    flags = (EMPTY_CLAIMS_FLAG,) if not verdicts else ()
    return ResponseVerdict(
        factuality=aggregate_response_label(verdicts),
        claim_verdicts=tuple(verdicts),
        flags=flags,
    )


@dataclass(frozen=True)
class ExecutionMatrix:
    """Execution results of every (test input x solution) pair.

    Rows follow `inputs`; each row holds k generated-solution outputs
    followed by the output of the solution under verification.
    """

    inputs: tuple[str, ...]
    outputs: tuple[tuple[ExecutionOutput, ...], ...]

    def __post_init__(self) -> None:
        if len(self.inputs) < 1:
            raise ValueError("execution matrix needs at least one test input")
        if len(self.outputs) != len(self.inputs):
            raise ValueError("one output row per test input required")
        widths = {len(row) for row in self.outputs}
        if len(widths) != 1:
            raise ValueError("execution matrix must be rectangular")
        if widths.pop() < 2:
            raise ValueError("need at least one generated solution plus the one under test")

    @property
    def num_generated(self) -> int:
        return len(self.outputs[0]) - 1

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "outputs": [[cell.to_dict() for cell in row] for row in self.outputs],
        }
