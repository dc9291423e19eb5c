"""HTTP surface over the checking pipeline.

Request/response bodies use the canonical JSON schemas of the domain
types. Bad bodies get 400, unsupported tasks 422, and live mode without
the required credentials 503.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import PipelineConfig
from .extraction import (
    extract_citation_claims,
    extract_code_claims,
    extract_kb_claims,
    extract_math_claims,
)
from .fixtures import Mode, ReplayMiss
from .models import Task
from .pipeline import PipelineContext, run_check_pipeline

logger = logging.getLogger(__name__)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _parse_task(value) -> Task:
    return Task(value)  # raises ValueError for unknown tasks


def _missing_live_credentials(config: PipelineConfig, task: Task) -> list[str]:
    if config.mode != Mode.LIVE:
        return []
    missing = []
    if not config.llm_api_key:
        missing.append("LLM_API_KEY")
    if task == Task.KBQA and not config.search_api_key:
        missing.append("SEARCH_API_KEY")
    if task == Task.CODE and not config.sandbox_cmd:
        missing.append("SANDBOX_CMD")
    return missing


def create_app(config: PipelineConfig, ctx: PipelineContext | None = None) -> FastAPI:
    app = FastAPI(title="verifact", version="0.1.0")
    context = ctx if ctx is not None else PipelineContext(config)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "mode": config.mode.value}

    @app.post("/v1/extract")
    async def extract(request: Request):
        try:
            body = await request.json()
        except Exception:  # noqa: BLE001
            return _error(400, "body must be a JSON object")
        if not isinstance(body, dict) or not isinstance(body.get("response"), str):
            return _error(400, "expected {task, response} with string response")
        if "task" not in body:
            return _error(400, "missing task field")
        try:
            task = _parse_task(body["task"])
        except ValueError:
            return _error(422, f"unsupported task: {body['task']!r}")
        try:
            if task == Task.KBQA:
                claims = extract_kb_claims(context.gateway, body["response"])
            elif task == Task.CODE:
                claims = extract_code_claims(body["response"])
            elif task == Task.MATH:
                claims = extract_math_claims(
                    context.gateway, body.get("prompt", ""), body["response"]
                )
            else:
                claims = extract_citation_claims(context.gateway, body["response"])
        except ReplayMiss as miss:
            return _error(424, f"missing fixture: {miss.request_hash}")
        return {"claims": [c.to_dict() for c in claims]}

    @app.post("/v1/check")
    async def check(request: Request):
        try:
            body = await request.json()
        except Exception:  # noqa: BLE001
            return _error(400, "body must be a JSON object")
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        for key in ("task", "prompt", "response"):
            if key not in body:
                return _error(400, f"missing {key} field")
        if not isinstance(body["prompt"], str) or not isinstance(body["response"], str):
            return _error(400, "prompt and response must be strings")
        try:
            task = _parse_task(body["task"])
        except ValueError:
            return _error(422, f"unsupported task: {body['task']!r}")
        missing = _missing_live_credentials(config, task)
        if missing:
            return _error(503, f"live mode is missing credentials: {', '.join(missing)}")
        if task == Task.CODE and not body.get("entry_point"):
            return _error(400, "code task requires entry_point")
        try:
            result = run_check_pipeline(
                task,
                body["prompt"],
                body["response"],
                context,
                entry_point=body.get("entry_point"),
            )
        except ReplayMiss as miss:
            return _error(424, f"missing fixture: {miss.request_hash}")
        return {
            "verdict": result.verdict.to_dict(),
            "claims": [c.to_dict() for c in result.claims],
            "trace": [entry.to_dict() for entry in result.trace],
        }

    return app
