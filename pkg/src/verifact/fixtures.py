"""Record/replay transport shared by every external tool client.

Each unique (tool, request) pair is hashed; responses are persisted one
JSON file per hash under fixtures/<tool>/. Repeated identical requests in
one session get numbered files (hash__2.json, ...) so sampled outputs
keep their diversity; replay falls back to the base file when a numbered
one is absent, which keeps literally-identical lookups deterministic.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from enum import Enum
from pathlib import Path
from typing import Callable

from .models import canonical_json

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


class ReplayMiss(RuntimeError):
    def __init__(self, tool: str, request_hash: str):
        super().__init__(f"no recorded fixture for {tool} request {request_hash}")
        self.tool = tool
        self.request_hash = request_hash


def request_hash(tool: str, request: dict) -> str:
    return hashlib.sha256(canonical_json([tool, request]).encode("utf-8")).hexdigest()


class FixtureStore:
    """One JSON file per request hash; safe for concurrent readers."""

    def __init__(self, root: Path | str | None, mode: Mode = Mode.REPLAY):
        self.mode = Mode(mode)
        self.root = Path(root) if root is not None else None
        if self.mode != Mode.LIVE and self.root is None:
            raise ValueError(f"{self.mode.value} mode needs a fixture directory")
        self._lock = threading.Lock()
        self._seen: dict[str, int] = {}

    def _path(self, tool: str, key: str, seq: int) -> Path:
        assert self.root is not None
        name = f"{key}.json" if seq == 1 else f"{key}__{seq}.json"
        return self.root / tool / name

    def _next_seq(self, key: str) -> int:
        with self._lock:
            self._seen[key] = self._seen.get(key, 0) + 1
            return self._seen[key]

    def reset_sequences(self) -> None:
        """Forget repeat counters (call between independent sessions)."""
        with self._lock:
            self._seen.clear()

    def fetch(self, tool: str, request: dict, live_call: Callable[[], dict]) -> dict:
        """Return the payload for this request according to the mode.

        The payload always contains request_hash and request; live_call's
        dict is merged in (e.g. {"response_text": ...} for chat, or
        {"response": ...} for tool pages).
        """
        key = request_hash(tool, request)
        if self.mode == Mode.LIVE:
            return {"request_hash": key, "request": request, **live_call()}
        seq = self._next_seq(key)
        path = self._path(tool, key, seq)
        if self.mode == Mode.REPLAY:
            if not path.exists():
                path = self._path(tool, key, 1)
            if not path.exists():
                raise ReplayMiss(tool, key)
            return json.loads(path.read_text(encoding="utf-8"))
        # record
        payload = {"request_hash": key, "request": request, **live_call()}
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return payload

    def count(self, tool: str | None = None) -> int:
        if self.root is None or not self.root.exists():
            return 0
        pattern = f"{tool}/*.json" if tool else "**/*.json"
        return sum(1 for _ in self.root.glob(pattern))
