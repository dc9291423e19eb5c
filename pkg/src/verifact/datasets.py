"""JSONL dataset ingestion with per-line validation.

One example per line: {"task", "prompt", "response", "gold_response_label"?,
"gold_claims"?: [{"claim": {...}, "label": bool}], "extras"?: {...}}.
Malformed lines are reported with their line numbers; loading continues.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .models import Claim, Task, claim_from_dict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetExample:
    task: Task
    prompt: str
    response: str
    gold_response_label: Optional[bool] = None
    gold_claims: Optional[tuple[tuple[Claim, bool], ...]] = None
    extras: dict = field(default_factory=dict)

    @property
    def entry_point(self) -> Optional[str]:
        return self.extras.get("entry_point")


@dataclass
class DatasetLoadResult:
    examples: list[DatasetExample]
    errors: list[tuple[int, str]]

    def __iter__(self):
        return iter(self.examples)

    def __len__(self):
        return len(self.examples)


def _parse_example(data: dict, task: Task) -> DatasetExample:
    if "task" not in data:
        raise ValueError("missing task field")
    if Task(data["task"]) != task:
        raise ValueError(f"task mismatch: expected {task.value}, got {data['task']!r}")
    prompt = data.get("prompt")
    response = data.get("response")
    if not isinstance(prompt, str) or not isinstance(response, str):
        raise ValueError("prompt and response must be strings")
    label = data.get("gold_response_label")
    if label is not None and not isinstance(label, bool):
        raise ValueError("gold_response_label must be a boolean when present")
    gold_claims = None
    if data.get("gold_claims") is not None:
        pairs = []
        for entry in data["gold_claims"]:
            claim = claim_from_dict(entry["claim"])
            pairs.append((claim, bool(entry["label"])))
        gold_claims = tuple(pairs)
    return DatasetExample(
        task=task,
        prompt=prompt,
        response=response,
        gold_response_label=label,
        gold_claims=gold_claims,
        extras=data.get("extras") or {},
    )


def load_dataset(path: str | Path, task: Task | str) -> DatasetLoadResult:
    """Validated examples plus (line_number, message) for every bad line."""
    task = Task(task)
    examples: list[DatasetExample] = []
    errors: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                examples.append(_parse_example(json.loads(line), task))
            except (ValueError, KeyError, TypeError) as exc:
                logger.warning("%s line %d: %s", path, lineno, exc)
                errors.append((lineno, str(exc)))
    return DatasetLoadResult(examples=examples, errors=errors)
