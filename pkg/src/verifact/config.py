"""Pipeline configuration with CLI > environment > config file > defaults.

Config files are JSON objects or flat `key = value` lines; keys match the
CLI flag names with underscores.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from .fixtures import Mode
from .querygen import QueryGenConfig


class ConfigError(ValueError):
    pass


ENV_KEYS = {
    "llm_api_key": "LLM_API_KEY",
    "llm_base_url": "LLM_BASE_URL",
    "model": "LLM_MODEL",
    "search_api_key": "SEARCH_API_KEY",
    "search_base_url": "SEARCH_BASE_URL",
    "scholar_base_url": "SCHOLAR_BASE_URL",
    "sandbox_cmd": "SANDBOX_CMD",
}

# supplying these on the command line makes no sense in replay mode
LIVE_ONLY_KEYS = ("llm_api_key", "search_api_key")

_INT_KEYS = {
    "parallelism",
    "num_search_queries",
    "num_test_inputs",
    "num_candidate_solutions",
    "memory_limit_mb",
    "evidence_cap",
    "rate_limit_rpm",
}
_FLOAT_KEYS = {"time_limit_s"}


@dataclass(frozen=True)
class PipelineConfig:
    mode: Mode = Mode.REPLAY
    fixture_dir: str = "fixtures"
    model: str = "gpt-3.5-turbo"
    extraction_model: Optional[str] = None  # defaults to `model`
    verification_model: Optional[str] = None
    llm_api_key: Optional[str] = None
    llm_base_url: str = "https://api.openai.com/v1"
    search_api_key: Optional[str] = None
    search_base_url: str = "https://google.serper.dev/search"
    scholar_base_url: str = "https://api.semanticscholar.org/graph/v1"
    sandbox_cmd: Optional[str] = None
    math_backend: str = "deterministic"
    author_backend: str = "deterministic"
    parallelism: int = 1
    num_search_queries: int = 2
    num_test_inputs: int = 3
    num_candidate_solutions: int = 3
    time_limit_s: float = 10.0
    memory_limit_mb: int = 512
    evidence_cap: int = 10
    rate_limit_rpm: int = 0  # 0 disables rate limiting

    def __post_init__(self) -> None:
        if self.math_backend not in ("deterministic", "llm"):
            raise ConfigError(f"unknown math backend: {self.math_backend!r}")
        if self.author_backend not in ("deterministic", "llm"):
            raise ConfigError(f"unknown author backend: {self.author_backend!r}")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")

    @property
    def querygen(self) -> QueryGenConfig:
        return QueryGenConfig(
            num_search_queries=self.num_search_queries,
            num_test_inputs=self.num_test_inputs,
            num_candidate_solutions=self.num_candidate_solutions,
        )

    def model_for(self, stage: str) -> str:
        if stage == "extraction" and self.extraction_model:
            return self.extraction_model
        if stage == "verification" and self.verification_model:
            return self.verification_model
        return self.model


def _parse_flat_config(text: str) -> dict:
    values: dict[str, Any] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno} is not `key = value`: {raw_line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip().strip("\"'")
    return values


def load_config_file(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    return _parse_flat_config(text)


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key == "mode":
        return Mode(str(value))
    return value


def build_config(
    cli: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
    config_file: str | Path | None = None,
) -> PipelineConfig:
    """Merge the three layers onto the defaults and validate."""
    env = os.environ if env is None else env
    merged: dict[str, Any] = {}
    if config_file is not None:
        merged.update({k: v for k, v in load_config_file(config_file).items() if v is not None})
    for key, env_name in ENV_KEYS.items():
        if env_name in env:
            merged[key] = env[env_name]
    for key, value in (cli or {}).items():
        if value is not None:
            merged[key] = value

    valid = {f.name for f in fields(PipelineConfig)}
    unknown = set(merged) - valid
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        coerced = {k: _coerce(k, v) for k, v in merged.items()}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    config = PipelineConfig(**coerced)
    if config.mode == Mode.REPLAY:
        offending = [k for k in LIVE_ONLY_KEYS if (cli or {}).get(k)]
        if offending:
            raise ConfigError(
                f"replay mode forbids live-only flags: {', '.join(offending)}"
            )
    return config
