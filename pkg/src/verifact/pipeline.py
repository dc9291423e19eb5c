"""End-to-end orchestration: extraction -> query generation -> tool
querying -> evidence collection -> agreement verification.

Per-claim failures degrade to per-claim diagnostic verdicts; only
configuration and fixture problems abort a run. The trace carries exactly
one entry per claim per stage, with timings.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .arithmetic import ExpressionParseError, eval_arithmetic
from .config import PipelineConfig
from .extraction import (
    extract_citation_claims,
    extract_code_claims,
    extract_kb_claims,
    extract_math_claims,
)
from .fixtures import FixtureStore, Mode
from .gateway import LlmGateway, TokenBucket
from .models import (
    ArithmeticResult,
    Claim,
    ClaimVerdict,
    ExecStatus,
    Prompt,
    ResponseVerdict,
    Task,
    build_response_verdict,
)
from .querygen import (
    QueryGenerationError,
    gen_candidate_solutions,
    gen_math_check,
    gen_scholar_query,
    gen_search_queries,
    gen_test_inputs,
)
from .sandbox import SandboxClient, SandboxError
from .scholar import ScholarClient, ScholarNotFound, ScholarTransportError
from .search import SearchClient
from .verification import (
    UNDETERMINED_FLAG,
    VERIFICATION_FAILED_FLAG,
    citation_not_found_verdict,
    self_check,
    verify_citation_claim,
    verify_code_claim,
    verify_kb_claim,
    verify_math_claims,
)

logger = logging.getLogger(__name__)

STAGES = (
    "claim_extraction",
    "query_generation",
    "tool_querying",
    "evidence_collection",
    "agreement_verification",
)


@dataclass(frozen=True)
class TraceEntry:
    claim_id: str
    stage: str
    detail: dict
    elapsed_ms: float

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "stage": self.stage,
            "detail": self.detail,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass
class PipelineResult:
    verdict: ResponseVerdict
    claims: list
    trace: list[TraceEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.to_dict(),
            "claims": [c.to_dict() for c in self.claims],
        }


class PipelineContext:
    """Shared gateway and tool clients built once from a config."""

    def __init__(self, config: PipelineConfig, http_post=None, search_post=None, scholar_get=None):
        self.config = config
        root = None if config.mode == Mode.LIVE else config.fixture_dir
        self.store = FixtureStore(root, config.mode)
        limiter = TokenBucket(config.rate_limit_rpm) if config.rate_limit_rpm else None
        gateway_kwargs = {}
        if http_post is not None:
            gateway_kwargs["http_post"] = http_post
        self.gateway = LlmGateway(
            self.store,
            model_id=config.model,
            api_key=config.llm_api_key,
            base_url=config.llm_base_url,
            rate_limiter=limiter,
            **gateway_kwargs,
        )
        search_kwargs = {}
        if search_post is not None:
            search_kwargs["http_post"] = search_post
        self.search = SearchClient(
            self.store,
            api_key=config.search_api_key,
            base_url=config.search_base_url,
            evidence_cap=config.evidence_cap,
            rate_limiter=TokenBucket(config.rate_limit_rpm) if config.rate_limit_rpm else None,
            **search_kwargs,
        )
        scholar_kwargs = {}
        if scholar_get is not None:
            scholar_kwargs["http_get"] = scholar_get
        self.scholar = ScholarClient(
            self.store,
            base_url=config.scholar_base_url,
            rate_limiter=TokenBucket(config.rate_limit_rpm) if config.rate_limit_rpm else None,
            **scholar_kwargs,
        )
        self.sandbox = SandboxClient(
            self.store,
            cmd=config.sandbox_cmd,
            time_limit_s=config.time_limit_s,
            memory_limit_mb=config.memory_limit_mb,
        )

    def close(self) -> None:
        self.sandbox.close()


class _Tracer:
    def __init__(self):
        self.entries: list[TraceEntry] = []
        self._start = time.perf_counter()

    def mark(self) -> None:
        self._start = time.perf_counter()

    def add(self, claim_id: str, stage: str, detail: dict) -> None:
        now = time.perf_counter()
        self.entries.append(
            TraceEntry(
                claim_id=claim_id,
                stage=stage,
                detail=detail,
                elapsed_ms=(now - self._start) * 1000.0,
            )
        )
        self._start = now


def _failure_verdict(claim_id: str, why: str) -> ClaimVerdict:
    return ClaimVerdict(
        claim_id=claim_id,
        factuality=False,
        reasoning=f"verification-failed: {why}",
        error=why,
        flags=(VERIFICATION_FAILED_FLAG,),
    )


def _check_kb_claim(ctx: PipelineContext, claim, tracer: _Tracer) -> ClaimVerdict:
    tracer.add(claim.id, "claim_extraction", {"claim": claim.to_dict()})
    result = gen_search_queries(
        ctx.gateway, claim, n=ctx.config.num_search_queries
    )
    tracer.add(
        claim.id,
        "query_generation",
        {"queries": [q.to_dict() for q in result.queries], "fallback": result.fallback_used},
    )
    evidence = []
    for query in result.queries:
        evidence.extend(ctx.search.search(query))
    tracer.add(claim.id, "tool_querying", {"tool": "search", "requests": len(result.queries)})
    evidence = evidence[: ctx.config.evidence_cap]
    tracer.add(
        claim.id, "evidence_collection", {"evidence": [e.to_dict() for e in evidence]}
    )
    verdict = verify_kb_claim(ctx.gateway, claim, evidence)
    tracer.add(claim.id, "agreement_verification", {"verdict": verdict.to_dict()})
    return verdict


def _check_code_claim(ctx: PipelineContext, claim, prompt: Prompt, tracer: _Tracer) -> ClaimVerdict:
    tracer.add(claim.id, "claim_extraction", {"claim": claim.to_dict()})
    try:
        inputs = gen_test_inputs(ctx.gateway, prompt, claim.id, k=ctx.config.num_test_inputs)
        candidates = gen_candidate_solutions(
            ctx.gateway, prompt, claim.id, k=ctx.config.num_candidate_solutions
        )
    except QueryGenerationError as exc:
        tracer.add(claim.id, "query_generation", {"error": str(exc)})
        tracer.add(claim.id, "tool_querying", {"skipped": True})
        tracer.add(claim.id, "evidence_collection", {"skipped": True})
        verdict = _failure_verdict(claim.id, str(exc))
        tracer.add(claim.id, "agreement_verification", {"verdict": verdict.to_dict()})
        return verdict
    tracer.add(
        claim.id,
        "query_generation",
        {
            "test_inputs": [q.to_dict() for q in inputs],
            "candidate_solutions": [q.to_dict() for q in candidates],
        },
    )
    try:
        matrix = ctx.sandbox.run_candidates(candidates, claim.code, inputs, claim_id=claim.id)
    except SandboxError as exc:
        tracer.add(claim.id, "tool_querying", {"error": str(exc)})
        tracer.add(claim.id, "evidence_collection", {"skipped": True})
        verdict = _failure_verdict(claim.id, str(exc))
        tracer.add(claim.id, "agreement_verification", {"verdict": verdict.to_dict()})
        return verdict
    tracer.add(
        claim.id,
        "tool_querying",
        {"tool": "sandbox", "executions": (matrix.num_generated + 1) * len(matrix.inputs)},
    )
    tracer.add(claim.id, "evidence_collection", {"execution_matrix": matrix.to_dict()})
    verdict = verify_code_claim(matrix, claim.id)
    tracer.add(claim.id, "agreement_verification", {"verdict": verdict.to_dict()})
    return verdict


def _wrap_math_program(program: str) -> str:
    """Turn a print-style check snippet into a callable returning its stdout."""
    indented = "\n".join("        " + line for line in program.splitlines())
    return (
        "import io, contextlib\n"
        "def run_check():\n"
        "    buf = io.StringIO()\n"
        "    with contextlib.redirect_stdout(buf):\n"
        f"{indented}\n"
        "    return buf.getvalue().strip()\n"
    )


def _math_llm_backend(ctx: PipelineContext, claim) -> ArithmeticResult:
    check = gen_math_check(ctx.gateway, claim)
    outputs = ctx.sandbox.execute(_wrap_math_program(check.program), ["run_check()"])
    out = outputs[0]
    matched = out.status == ExecStatus.OK and out.value in ("'True'", '"True"')
    return ArithmeticResult(claim_id=claim.id, matched=matched)


def _check_math_claim(ctx: PipelineContext, claim, tracer: _Tracer) -> ClaimVerdict:
    tracer.add(claim.id, "claim_extraction", {"claim": claim.to_dict()})
    backend = ctx.config.math_backend
    tracer.add(claim.id, "query_generation", {"backend": backend})
    result = None
    note = None
    if backend == "deterministic":
        try:
            result = eval_arithmetic(claim)
        except ExpressionParseError as exc:
            note = str(exc)
    if result is None and backend == "llm":
        try:
            result = _math_llm_backend(ctx, claim)
        except (QueryGenerationError, SandboxError) as exc:
            note = str(exc)
    tracer.add(claim.id, "tool_querying", {"backend": backend, "note": note})
    if result is None:
        tracer.add(claim.id, "evidence_collection", {"skipped": True, "note": note})
        verdict = ClaimVerdict(
            claim_id=claim.id,
            factuality=True,
            reasoning=f"calculation could not be checked: {note}",
            flags=(UNDETERMINED_FLAG,),
        )
    else:
        tracer.add(claim.id, "evidence_collection", {"arithmetic_result": result.to_dict()})
        verdicts, _ = verify_math_claims([(claim, result)])
        verdict = verdicts[0]
    tracer.add(claim.id, "agreement_verification", {"verdict": verdict.to_dict()})
    return verdict


def _check_citation_claim(ctx: PipelineContext, claim, tracer: _Tracer) -> ClaimVerdict:
    tracer.add(claim.id, "claim_extraction", {"claim": claim.to_dict()})
    title = gen_scholar_query(claim)
    tracer.add(claim.id, "query_generation", {"query": title})
    try:
        record = ctx.scholar.lookup(title, claim.id)
        tracer.add(claim.id, "tool_querying", {"tool": "scholar"})
        tracer.add(claim.id, "evidence_collection", {"scholar_record": record.to_dict()})
        verdict = verify_citation_claim(
            claim,
            record,
            gateway=ctx.gateway,
            author_backend=ctx.config.author_backend,
        )
    except ScholarNotFound:
        tracer.add(claim.id, "tool_querying", {"tool": "scholar"})
        tracer.add(claim.id, "evidence_collection", {"scholar_record": None})
        verdict = citation_not_found_verdict(claim)
    except ScholarTransportError as exc:
        tracer.add(claim.id, "tool_querying", {"tool": "scholar", "error": str(exc)})
        tracer.add(claim.id, "evidence_collection", {"skipped": True})
        verdict = _failure_verdict(claim.id, str(exc))
    tracer.add(claim.id, "agreement_verification", {"verdict": verdict.to_dict()})
    return verdict


def run_check_pipeline(
    task: Task,
    prompt_text: str,
    response_text: str,
    ctx: PipelineContext,
    entry_point: Optional[str] = None,
) -> PipelineResult:
    """Check one response; returns the response verdict plus a full trace."""
    task = Task(task)
    tracer = _Tracer()
    if task == Task.KBQA:
        claims = extract_kb_claims(ctx.gateway, response_text)
        check: Callable[[Claim, _Tracer], ClaimVerdict] = lambda c, t: _check_kb_claim(ctx, c, t)
    elif task == Task.CODE:
        prompt = Prompt(task=task, text=prompt_text, entry_point=entry_point or "")
        if not prompt.entry_point:
            raise ValueError("code task requires an entry_point")
        claims = extract_code_claims(response_text)
        check = lambda c, t: _check_code_claim(ctx, c, prompt, t)
    elif task == Task.MATH:
        claims = extract_math_claims(ctx.gateway, prompt_text, response_text)
        check = lambda c, t: _check_math_claim(ctx, c, t)
    elif task == Task.SCIENTIFIC:
        claims = extract_citation_claims(ctx.gateway, response_text)
        check = lambda c, t: _check_citation_claim(ctx, c, t)
    else:  # pragma: no cover - Task() raises first
        raise ValueError(f"unsupported task: {task}")

    if ctx.config.parallelism > 1 and len(claims) > 1:
        tracers = [_Tracer() for _ in claims]
        with ThreadPoolExecutor(max_workers=ctx.config.parallelism) as pool:
            verdicts = list(pool.map(lambda pair: check(pair[0], pair[1]), zip(claims, tracers)))
        for sub in tracers:
            tracer.entries.extend(sub.entries)
    else:
        verdicts = []
        for claim in claims:
            tracer.mark()
            verdicts.append(check(claim, tracer))

    return PipelineResult(
        verdict=build_response_verdict(verdicts),
        claims=list(claims),
        trace=tracer.entries,
    )


def run_self_check(
    task: Task,
    prompt_text: str,
    response_text: str,
    ctx: PipelineContext,
    shots: int = 0,
    entry_point: Optional[str] = None,
) -> PipelineResult:
    """Tool-free baseline: extract claims, then have the model judge each
    one with no evidence."""
    task = Task(task)
    if task == Task.KBQA:
        claims = extract_kb_claims(ctx.gateway, response_text)
        unit = lambda c: c.statement
    elif task == Task.CODE:
        claims = extract_code_claims(response_text)
        unit = lambda c: c.code
    elif task == Task.MATH:
        claims = extract_math_claims(ctx.gateway, prompt_text, response_text)
        unit = lambda c: f"{c.calculation} = {c.calculated_answer}"
    else:
        claims = extract_citation_claims(ctx.gateway, response_text)
        unit = lambda c: f'The paper "{c.title}" was published in {c.year} by {c.authors}.'

    tracer = _Tracer()
    verdicts = []
    for claim in claims:
        tracer.mark()
        tracer.add(claim.id, "claim_extraction", {"claim": claim.to_dict()})
        tracer.add(claim.id, "query_generation", {"method": f"self_check_{shots}"})
        tracer.add(claim.id, "tool_querying", {"tool": None})
        tracer.add(claim.id, "evidence_collection", {"evidence": []})
        verdict = self_check(ctx.gateway, task, unit(claim), shots=shots, claim_id=claim.id)
        verdicts.append(verdict)
        tracer.add(claim.id, "agreement_verification", {"verdict": verdict.to_dict()})
    return PipelineResult(
        verdict=build_response_verdict(verdicts),
        claims=list(claims),
        trace=tracer.entries,
    )
