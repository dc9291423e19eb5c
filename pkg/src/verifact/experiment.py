"""Experiment harness: batch evaluation, extraction-similarity scoring,
and the weighted chatbot audit.

All outputs are deterministic under replay: stable iteration order, sorted
JSON keys, no timestamps.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError
from .datasets import DatasetExample, load_dataset
from .extraction import extract_kb_claims
from .fixtures import Mode, ReplayMiss
from .metrics import compute_prf, score_claim_extraction, weighted_claim_accuracy
from .models import Task
from .pipeline import PipelineContext, PipelineResult, run_check_pipeline, run_self_check
from .rouge import rouge_metric

logger = logging.getLogger(__name__)

METHODS = ("pipeline", "self_check_0", "self_check_3")


@dataclass
class ExperimentConfig:
    tasks: list[Task]
    dataset_paths: dict[Task, str]
    method: str = "pipeline"
    out_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")


def _check_replay_preconditions(ctx: PipelineContext) -> None:
    if ctx.config.mode != Mode.REPLAY:
        return
    root = Path(ctx.config.fixture_dir)
    if not root.exists() or not any(root.glob("**/*.json")):
        raise ConfigError(
            f"replay mode needs recorded fixtures, but {root} is missing or empty"
        )


def _run_method(ctx: PipelineContext, example: DatasetExample, method: str) -> PipelineResult:
    if method == "pipeline":
        return run_check_pipeline(
            example.task,
            example.prompt,
            example.response,
            ctx,
            entry_point=example.entry_point,
        )
    shots = 3 if method.endswith("_3") else 0
    return run_self_check(
        example.task,
        example.prompt,
        example.response,
        ctx,
        shots=shots,
        entry_point=example.entry_point,
    )


def run_experiment(exp: ExperimentConfig, ctx: PipelineContext) -> dict:
    """Evaluate the chosen method per task; returns the report dict and, when
    out_dir is set, writes results.jsonl / metrics.json / metrics.md."""
    _check_replay_preconditions(ctx)
    claim_rows: list[dict] = []
    metrics: dict[str, dict] = {}
    replay_misses: list[dict] = []

    for task in exp.tasks:
        loaded = load_dataset(exp.dataset_paths[task], task)
        if loaded.errors:
            logger.warning("%d malformed lines in %s", len(loaded.errors), exp.dataset_paths[task])
        claim_preds: list[bool] = []
        claim_golds: list[bool] = []
        response_preds: list[bool] = []
        response_golds: list[bool] = []
        unmatched_gold = 0

        for index, example in enumerate(loaded.examples):
            try:
                result = _run_method(ctx, example, exp.method)
            except ReplayMiss as miss:
                replay_misses.append(
                    {"task": task.value, "example_index": index, "request_hash": miss.request_hash}
                )
                continue
            verdicts_by_id = {v.claim_id: v for v in result.verdict.claim_verdicts}
            gold_by_id = {}
            if example.gold_claims:
                gold_by_id = {claim.id: label for claim, label in example.gold_claims}
                for claim_id, label in gold_by_id.items():
                    verdict = verdicts_by_id.get(claim_id)
                    if verdict is None:
                        unmatched_gold += 1
                        continue
                    claim_preds.append(verdict.factuality)
                    claim_golds.append(label)
            if example.gold_response_label is not None:
                response_preds.append(result.verdict.factuality)
                response_golds.append(example.gold_response_label)
            for verdict in result.verdict.claim_verdicts:
                claim_rows.append(
                    {
                        "task": task.value,
                        "example_index": index,
                        "method": exp.method,
                        "claim_id": verdict.claim_id,
                        "predicted": verdict.factuality,
                        "gold": gold_by_id.get(verdict.claim_id),
                        "flags": list(verdict.flags),
                    }
                )

        task_metrics: dict = {"examples": len(loaded.examples), "load_errors": len(loaded.errors)}
        if claim_preds:
            task_metrics["claim_level"] = compute_prf(claim_preds, claim_golds).to_dict()
        if response_preds:
            task_metrics["response_level"] = compute_prf(response_preds, response_golds).to_dict()
        if unmatched_gold:
            task_metrics["unmatched_gold_claims"] = unmatched_gold
        metrics[task.value] = task_metrics

    report = {
        "method": exp.method,
        "mode": ctx.config.mode.value,
        "metrics": metrics,
        "replay_misses": replay_misses,
    }
    if exp.out_dir is not None:
        _write_report(exp.out_dir, claim_rows, report)
    return report


def _format_metric_row(task: str, level: str, prf: dict) -> str:
    return (
        f"| {task} | {level} | {prf['accuracy']:.4f} | {prf['recall']:.4f} "
        f"| {prf['precision']:.4f} | {prf['f1']:.4f} |"
    )


def _write_report(out_dir: Path, claim_rows: list[dict], report: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "results.jsonl", "w", encoding="utf-8") as handle:
        for row in claim_rows:
            handle.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    (out_dir / "metrics.json").write_text(
        json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    lines = [
        f"# Evaluation ({report['method']})",
        "",
        "| task | level | accuracy | recall | precision | f1 |",
        "|---|---|---|---|---|---|",
    ]
    for task, task_metrics in sorted(report["metrics"].items()):
        for level in ("claim_level", "response_level"):
            if level in task_metrics:
                lines.append(_format_metric_row(task, level, task_metrics[level]))
    (out_dir / "metrics.md").write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- extraction similarity (claim extractor vs gold claim sets) --------------------

EXTRACTION_METRICS = ("1", "2", "L")


def score_extraction_experiment(
    dataset_path: str | Path, ctx: PipelineContext, variants: Sequence[str] = EXTRACTION_METRICS
) -> dict:
    """Mean best-match similarity of extracted vs gold claims, macro-averaged
    over samples; samples without claims on either side are skipped."""
    _check_replay_preconditions(ctx)
    loaded = load_dataset(dataset_path, Task.KBQA)
    per_variant: dict[str, dict[str, list[float]]] = {
        v: {"precision": [], "recall": [], "f1": []} for v in variants
    }
    skipped = 0
    for example in loaded.examples:
        if not example.gold_claims:
            skipped += 1
            continue
        golden = [claim.statement for claim, _ in example.gold_claims]
        extracted = [c.statement for c in extract_kb_claims(ctx.gateway, example.response)]
        if not extracted or not golden:
            skipped += 1
            continue
        for variant in variants:
            for component in ("precision", "recall", "f1"):
                score = score_claim_extraction(
                    extracted, golden, rouge_metric(variant, component)
                )
                per_variant[variant][component].append(score)
    summary: dict = {"samples": len(loaded.examples), "skipped": skipped}
    for variant, components in per_variant.items():
        summary[f"rouge_{variant.lower()}"] = {
            component: (sum(values) / len(values) if values else 0.0)
            for component, values in components.items()
        }
    return summary


# --- weighted chatbot audit ----------------------------------------------------------

def audit_chatbots(directory: str | Path, ctx: PipelineContext) -> dict:
    """Treat the pipeline as the judge: for each <name>.jsonl in the
    directory, report weighted claim-level accuracy and response accuracy."""
    _check_replay_preconditions(ctx)
    directory = Path(directory)
    files = sorted(directory.glob("*.jsonl"))
    if not files:
        raise ConfigError(f"no .jsonl chatbot files under {directory}")
    rows = {}
    for path in files:
        per_task_claims: dict[Task, list[bool]] = {t: [] for t in Task}
        response_flags: list[bool] = []
        examples = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    examples.append(json.loads(line))
        for data in examples:
            task = Task(data["task"])
            result = run_check_pipeline(
                task,
                data["prompt"],
                data["response"],
                ctx,
                entry_point=(data.get("extras") or {}).get("entry_point"),
            )
            per_task_claims[task].extend(v.factuality for v in result.verdict.claim_verdicts)
            response_flags.append(result.verdict.factuality)
        missing = [t.value for t in Task if not per_task_claims[t]]
        if missing:
            raise ConfigError(
                f"{path.name}: weighted accuracy needs all four scenarios; missing {missing}"
            )
        accuracies = {
            t: sum(flags) / len(flags) for t, flags in per_task_claims.items()
        }
        rows[path.stem] = {
            "weighted_claim_accuracy": weighted_claim_accuracy(
                accuracies[Task.KBQA],
                accuracies[Task.CODE],
                accuracies[Task.MATH],
                accuracies[Task.SCIENTIFIC],
            ),
            "response_accuracy": sum(response_flags) / len(response_flags),
            "per_task_claim_accuracy": {t.value: accuracies[t] for t in Task},
            "responses": len(response_flags),
        }
    return {"chatbots": rows}
