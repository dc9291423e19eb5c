/**
 * Wire protocol: one JSON job per line on stdin, one JSON response per
 * line on stdout, stderr reserved for logs. The first stdout line is the
 * version handshake.
 */

export const RUNNER_PROTOCOL = 1;

export interface RunnerJob {
  solution_code: string;
  call_expressions: string[];
  time_limit_s: number;
  memory_limit_mb: number;
}

export type CallStatus = "ok" | "exception" | "timeout";

export interface CallResult {
  status: CallStatus;
  value: string;
  stderr_excerpt: string;
}

export interface RunnerResponse {
  results: CallResult[];
}

export interface ProtocolError {
  error: string;
  results: [];
}

export const DEFAULT_TIME_LIMIT_S = 10;
export const DEFAULT_MEMORY_LIMIT_MB = 512;

/** Validate a parsed job object, filling in limit defaults. */
export function normalizeJob(raw: unknown): RunnerJob {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("job must be a JSON object");
  }
  const record = raw as Record<string, unknown>;
  if (typeof record.solution_code !== "string") {
    throw new Error("solution_code must be a string");
  }
  if (
    !Array.isArray(record.call_expressions) ||
    record.call_expressions.length === 0 ||
    !record.call_expressions.every((c) => typeof c === "string")
  ) {
    throw new Error("call_expressions must be a non-empty list of strings");
  }
  const timeLimit = record.time_limit_s ?? DEFAULT_TIME_LIMIT_S;
  const memoryLimit = record.memory_limit_mb ?? DEFAULT_MEMORY_LIMIT_MB;
  if (typeof timeLimit !== "number" || timeLimit <= 0) {
    throw new Error("time_limit_s must be a positive number");
  }
  if (typeof memoryLimit !== "number" || memoryLimit <= 0) {
    throw new Error("memory_limit_mb must be a positive number");
  }
  return {
    solution_code: record.solution_code,
    call_expressions: record.call_expressions as string[],
    time_limit_s: timeLimit,
    memory_limit_mb: memoryLimit,
  };
}
