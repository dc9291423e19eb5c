/**
 * Sandbox worker: evaluates call expressions against a solution in fresh
 * Python child processes, one process per call, so a hung or poisoned
 * call can never corrupt later ones.
 *
 * The child gets an address-space limit, a disabled socket layer, and an
 * isolated temporary working directory; the parent enforces the wall
 * clock and kills on timeout. The call's return value comes back as the
 * language's canonical repr string.
 */

import { spawn } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import * as readline from "node:readline";

import {
  CallResult,
  RUNNER_PROTOCOL,
  RunnerJob,
  normalizeJob,
} from "./protocol.js";

const PYTHON_BIN = process.env.PYTHON_BIN ?? "python3";
const STDERR_EXCERPT_CHARS = 400;

// Reads one JSON payload from stdin, applies the limits, executes the
// solution, evaluates the call, and emits exactly one JSON result line.
// User prints are captured and discarded so the protocol stays clean.
const PY_DRIVER = `
import contextlib, io, json, sys
payload = json.loads(sys.stdin.read())
try:
    import resource
    limit = int(payload["memory_limit_mb"]) * 1024 * 1024
    resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
except Exception:
    pass
try:
    import socket
    def _no_network(*args, **kwargs):
        raise OSError("network access is disabled in the sandbox")
    socket.socket = _no_network
    socket.create_connection = _no_network
except Exception:
    pass
result = {"status": "ok", "value": "", "stderr_excerpt": ""}
sink = io.StringIO()
try:
    namespace = {"__name__": "__sandbox__"}
    with contextlib.redirect_stdout(sink):
        exec(compile(payload["solution_code"], "<solution>", "exec"), namespace)
        value = eval(compile(payload["call_expression"], "<call>", "eval"), namespace)
    result["value"] = repr(value)[:65536]
except BaseException as exc:
    detail = f"{type(exc).__name__}: {exc}"
    result = {"status": "exception", "value": "", "stderr_excerpt": detail[:${STDERR_EXCERPT_CHARS}]}
sys.stdout.write(json.dumps(result))
sys.stdout.flush()
`;

function excerpt(text: string): string {
  return text.slice(-STDERR_EXCERPT_CHARS);
}

export function runCall(
  job: RunnerJob,
  callExpression: string
): Promise<CallResult> {
  return new Promise((resolve) => {
    const workDir = fs.mkdtempSync(path.join(os.tmpdir(), "sandbox-call-"));
    const child = spawn(PYTHON_BIN, ["-c", PY_DRIVER], {
      cwd: workDir,
      stdio: ["pipe", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    let settled = false;

    const finish = (result: CallResult) => {
      if (settled) return;
      settled = true;
      clearTimeout(timer);
      fs.rm(workDir, { recursive: true, force: true }, () => {});
      resolve(result);
    };

    const timer = setTimeout(() => {
      child.kill("SIGKILL");
      finish({ status: "timeout", value: "", stderr_excerpt: "" });
    }, job.time_limit_s * 1000);

    child.stdout.on("data", (chunk) => {
      stdout += chunk;
    });
    child.stderr.on("data", (chunk) => {
      stderr += chunk;
    });
    child.on("error", (err) => {
      finish({ status: "exception", value: "", stderr_excerpt: excerpt(String(err)) });
    });
    child.on("close", () => {
      if (settled) return;
      try {
        const parsed = JSON.parse(stdout) as CallResult;
        if (parsed.status === "exception" && !parsed.stderr_excerpt && stderr) {
          parsed.stderr_excerpt = excerpt(stderr);
        }
        finish(parsed);
      } catch {
        // the child died before printing a result (e.g. hard MemoryError)
        finish({
          status: "exception",
          value: "",
          stderr_excerpt: excerpt(stderr || "child produced no result"),
        });
      }
    });

    child.stdin.write(
      JSON.stringify({
        solution_code: job.solution_code,
        call_expression: callExpression,
        memory_limit_mb: job.memory_limit_mb,
      })
    );
    child.stdin.end();
  });
}

export async function runJob(job: RunnerJob): Promise<CallResult[]> {
  const results: CallResult[] = [];
  for (const call of job.call_expressions) {
    results.push(await runCall(job, call));
  }
  return results;
}

async function main(): Promise<void> {
  process.stdout.write(JSON.stringify({ runner_protocol: RUNNER_PROTOCOL }) + "\n");
  const lines = readline.createInterface({ input: process.stdin, terminal: false });
  for await (const line of lines) {
    if (!line.trim()) continue;
    let job: RunnerJob;
    try {
      job = normalizeJob(JSON.parse(line));
    } catch (err) {
      process.stdout.write(
        JSON.stringify({ error: `malformed job: ${String(err instanceof Error ? err.message : err)}`, results: [] }) + "\n"
      );
      continue;
    }
    const results = await runJob(job);
    process.stdout.write(JSON.stringify({ results }) + "\n");
  }
}

const entryPoint = process.argv[1] ?? "";
if (entryPoint.endsWith("runner.js")) {
  main().catch((err) => {
    console.error("runner fatal error:", err);
    process.exit(1);
  });
}
