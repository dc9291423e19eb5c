"""Client side of the execution sandbox.

Jobs are one JSON object per line on the runner's stdin; results come back
one JSON object per line on stdout (stderr is reserved for runner logs).
The runner process is launched from SANDBOX_CMD and kept alive for the
client's lifetime. Everything is routed through the fixture store, so
replay runs never execute anything.
"""

from __future__ import annotations

import json
import logging
import shlex
import subprocess
import threading
from typing import Optional, Sequence

from .fixtures import FixtureStore
from .models import (
    CandidateSolution,
    ExecStatus,
    ExecutionMatrix,
    ExecutionOutput,
    TestInput,
)

logger = logging.getLogger(__name__)

RUNNER_PROTOCOL_VERSION = 1
DEFAULT_TIME_LIMIT_S = 10.0
DEFAULT_MEMORY_LIMIT_MB = 512


class SandboxError(RuntimeError):
    """Sandbox unreachable or the protocol broke down."""


class SandboxClient:
    def __init__(
        self,
        store: FixtureStore,
        cmd: Optional[str] = None,
        time_limit_s: float = DEFAULT_TIME_LIMIT_S,
        memory_limit_mb: int = DEFAULT_MEMORY_LIMIT_MB,
    ):
        self.store = store
        self.cmd = cmd
        self.time_limit_s = time_limit_s
        self.memory_limit_mb = memory_limit_mb
        self._proc: Optional[subprocess.Popen] = None
        self._lock = threading.Lock()

    # --- live transport -----------------------------------------------------

    def _ensure_runner(self) -> subprocess.Popen:
        if self._proc is not None and self._proc.poll() is None:
            return self._proc
        if not self.cmd:
            raise SandboxError("no sandbox runner configured (SANDBOX_CMD)")
        try:
            self._proc = subprocess.Popen(
                shlex.split(self.cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as exc:
            raise SandboxError(f"cannot launch sandbox runner: {exc}") from exc
        handshake = self._proc.stdout.readline()
        try:
            header = json.loads(handshake)
        except json.JSONDecodeError as exc:
            raise SandboxError(f"bad runner handshake: {handshake!r}") from exc
        if header.get("runner_protocol") != RUNNER_PROTOCOL_VERSION:
            raise SandboxError(f"unsupported runner protocol: {header!r}")
        return self._proc

    def _call_live(self, request: dict) -> dict:
        with self._lock:
            proc = self._ensure_runner()
            try:
                proc.stdin.write(json.dumps(request) + "\n")
                proc.stdin.flush()
                line = proc.stdout.readline()
            except (BrokenPipeError, OSError) as exc:
                raise SandboxError(f"sandbox runner died: {exc}") from exc
        if not line:
            raise SandboxError("sandbox runner closed its stdout")
        response = json.loads(line)
        if "error" in response:
            raise SandboxError(f"runner protocol error: {response['error']}")
        return {"response": response}

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None

    # --- API ------------------------------------------------------------------

    def execute(self, solution_code: str, call_expressions: Sequence[str]) -> list[ExecutionOutput]:
        """Run every call expression against the solution, one output per call."""
        request = {
            "solution_code": solution_code,
            "call_expressions": list(call_expressions),
            "time_limit_s": self.time_limit_s,
            "memory_limit_mb": self.memory_limit_mb,
        }
        payload = self.store.fetch("sandbox", request, lambda: self._call_live(request))
        results = payload["response"].get("results", [])
        if len(results) != len(call_expressions):
            raise SandboxError(
                f"runner returned {len(results)} results for {len(call_expressions)} calls"
            )
        return [
            ExecutionOutput(
                value=str(item.get("value", "")),
                status=ExecStatus(item.get("status", "exception")),
                stderr_excerpt=str(item.get("stderr_excerpt", "")),
            )
            for item in results
        ]

    def run_candidates(
        self,
        candidates: Sequence[CandidateSolution],
        under_test: str,
        inputs: Sequence[TestInput],
        claim_id: str = "",
    ) -> ExecutionMatrix:
        """(k+1) x m executions: every candidate plus the solution under test
        against every input. Non-ok cells keep their status so the verifier
        can treat them as never-equal sentinels."""
        if not candidates or not inputs:
            raise ValueError("need at least one candidate solution and one test input")
        calls = [q.call_expression for q in inputs]
        columns = [self.execute(c.code, calls) for c in candidates]
        columns.append(self.execute(under_test, calls))
        rows = []
        for i in range(len(calls)):
            rows.append(
                tuple(
                    ExecutionOutput(
                        value=col[i].value,
                        status=col[i].status,
                        stderr_excerpt=col[i].stderr_excerpt,
                        claim_id=claim_id,
                    )
                    for col in columns
                )
            )
        return ExecutionMatrix(inputs=tuple(calls), outputs=tuple(rows))
