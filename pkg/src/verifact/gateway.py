"""Chat-completion access with structured-output parsing and record/replay.

The gateway hashes each request over (model_id, system, user, temperature)
so recorded fixtures survive max_tokens tweaks, and exposes a permissive
JSON extractor that copes with code fences, leading prose, and
Python-style literals in model output.
"""

from __future__ import annotations

import ast
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import requests

from .fixtures import FixtureStore, Mode
logger = logging.getLogger(__name__)

DEFAULT_SYSTEM_PROMPT = "You are a brilliant assistant."
DEFAULT_MODEL = "gpt-3.5-turbo"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
MAX_TRANSPORT_RETRIES = 5
JSON_RETRY_BUDGET = 3


class MalformedOutput(ValueError):
    """Model output could not be coerced into the expected JSON shape."""


class TransportError(RuntimeError):
    """Live chat call failed after all retries."""


@dataclass(frozen=True)
class ChatRequest:
    user: str
    system: str = DEFAULT_SYSTEM_PROMPT
    temperature: float = 0.0
    max_tokens: int = 2048
    model_id: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of [0, 2]: {self.temperature}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class ChatResult:
    text: str
    usage: dict = field(default_factory=dict)
    from_replay: bool = False


class TokenBucket:
    """Simple requests-per-minute limiter shared across workers."""

    def __init__(self, requests_per_minute: int):
        self.capacity = max(1, requests_per_minute)
        self.tokens = float(self.capacity)
        self.updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self.tokens = min(
                    self.capacity, self.tokens + (now - self.updated) * self.capacity / 60.0
                )
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) * 60.0 / self.capacity
            time.sleep(wait)


def _default_http_post(url: str, headers: dict, body: dict, timeout: float) -> dict:
    response = requests.post(url, headers=headers, json=body, timeout=timeout)
    response.raise_for_status()
    return response.json()


class LlmGateway:
    """Uniform chat access in live, record, or replay mode."""

    def __init__(
        self,
        store: FixtureStore,
        model_id: str = DEFAULT_MODEL,
        api_key: Optional[str] = None,
        base_url: str = DEFAULT_BASE_URL,
        rate_limiter: Optional[TokenBucket] = None,
        http_post: Callable[..., dict] = _default_http_post,
        timeout: float = 60.0,
        backoff_base: float = 0.5,
    ):
        self.store = store
        self.model_id = model_id
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.rate_limiter = rate_limiter
        self.http_post = http_post
        self.timeout = timeout
        self.backoff_base = backoff_base

    @property
    def mode(self) -> Mode:
        return self.store.mode

    def _request_dict(self, req: ChatRequest) -> dict:
        # max_tokens deliberately excluded so fixtures survive limit tweaks
        return {
            "model_id": req.model_id or self.model_id,
            "system": req.system,
            "user": req.user,
            "temperature": req.temperature,
        }

    def _call_live(self, req: ChatRequest) -> dict:
        if self.mode != Mode.REPLAY and not self.api_key:
            raise TransportError("live chat requires an API credential (LLM_API_KEY)")
        body = {
            "model": req.model_id or self.model_id,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(MAX_TRANSPORT_RETRIES):
            try:
                if self.rate_limiter is not None:
                    self.rate_limiter.acquire()
                page = self.http_post(url, headers=headers, body=body, timeout=self.timeout)
                text = page["choices"][0]["message"]["content"]
                usage = page.get("usage", {})
                return {"response_text": text, "usage": usage}
            except Exception as exc:  # noqa: BLE001 - retry any transport fault
                last_error = exc
                logger.warning("chat transport failure (attempt %d): %s", attempt + 1, exc)
                if attempt + 1 < MAX_TRANSPORT_RETRIES:
                    time.sleep(self.backoff_base * (2**attempt))
        raise TransportError(f"chat call failed after {MAX_TRANSPORT_RETRIES} attempts: {last_error}")

    def complete_chat(self, req: ChatRequest) -> ChatResult:
        request = self._request_dict(req)
        payload = self.store.fetch("llm", request, lambda: self._call_live(req))
        return ChatResult(
            text=payload["response_text"],
            usage=payload.get("usage", {}),
            from_replay=self.mode == Mode.REPLAY,
        )


# --- structured output parsing ------------------------------------------------

_OPENERS = {"list_of_objects": "[", "list_of_strings": "[", "object": "{"}
_CLOSERS = {"[": "]", "{": "}"}


def _strip_code_fences(text: str) -> str:
    if "```" not in text:
        return text
    lines = []
    for line in text.splitlines():
        if line.lstrip().startswith("```"):
            continue
        lines.append(line)
    return "\n".join(lines)


def _balanced_spans(text: str, opener: str):
    """Yield substrings that look like balanced JSON values starting at opener."""
    closer = _CLOSERS[opener]
    start = text.find(opener)
    while start != -1:
        depth = 0
        in_string: Optional[str] = None
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == in_string:
                    in_string = None
                continue
            if ch in "\"'":
                in_string = ch
            elif ch in "[{":
                depth += 1
            elif ch in "]}":
                depth -= 1
                if depth == 0:
                    yield text[start : i + 1]
                    break
        start = text.find(opener, start + 1)


def _loads_permissive(span: str) -> Any:
    try:
        return json.loads(span)
    except json.JSONDecodeError:
        pass
    try:
        return ast.literal_eval(span)
    except (ValueError, SyntaxError):
        return None


def parse_json_payload(text: str, shape: str, required_keys: Optional[list[str]] = None) -> Any:
    """Extract the first balanced JSON value of the requested shape.

    shape: "list_of_objects", "list_of_strings", or "object". Code fences
    and surrounding prose are tolerated; Python literals (single quotes,
    True/False/None) are accepted as a repair path.
    """
    if shape not in _OPENERS:
        raise ValueError(f"unknown shape: {shape!r}")
    cleaned = _strip_code_fences(text)
    for span in _balanced_spans(cleaned, _OPENERS[shape]):
        value = _loads_permissive(span)
        if value is None:
            continue
        if shape == "object":
            if not isinstance(value, dict):
                continue
            if required_keys and not all(k in value for k in required_keys):
                continue
            return value
        if not isinstance(value, list):
            continue
        if shape == "list_of_objects":
            if not all(isinstance(item, dict) for item in value):
                continue
            if required_keys and not all(
                all(k in item for k in required_keys) for item in value
            ):
                continue
            return value
        if shape == "list_of_strings":
            if not all(isinstance(item, str) for item in value):
                continue
            return value
    snippet = text[:200].replace("\n", " ")
    raise MalformedOutput(f"no {shape} value found in model output: {snippet!r}")


def chat_json(
    gateway: LlmGateway,
    req: ChatRequest,
    shape: str,
    required_keys: Optional[list[str]] = None,
    retries: int = JSON_RETRY_BUDGET,
) -> Any:
    """complete_chat + parse, re-issuing the request on malformed output."""
    last: Optional[MalformedOutput] = None
    for _ in range(max(1, retries)):
        result = gateway.complete_chat(req)
        try:
            return parse_json_payload(result.text, shape, required_keys)
        except MalformedOutput as exc:
            last = exc
            logger.warning("malformed model output, retrying: %s", exc)
    raise last if last is not None else MalformedOutput("empty retry budget")


def coerce_bool(value: Any) -> bool:
    """Model outputs use JSON true/false, Python True/False, or strings."""
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("true", "yes"):
            return True
        if lowered in ("false", "no"):
            return False
    raise MalformedOutput(f"cannot interpret {value!r} as a boolean")
