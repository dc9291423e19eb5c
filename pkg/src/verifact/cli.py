"""Command line interface.

Subcommands: check, extract, eval, audit, record-fixtures, serve.
Exit codes: 0 ok, 1 config error, 2 fixture miss, 3 partial failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, build_config
from .datasets import load_dataset
from .gateway import TransportError
from .sandbox import SandboxError
from .scholar import ScholarTransportError
from .search import SearchTransportError
from .experiment import ExperimentConfig, audit_chatbots, run_experiment, score_extraction_experiment
from .extraction import (
    extract_citation_claims,
    extract_code_claims,
    extract_kb_claims,
    extract_math_claims,
)
from .fixtures import Mode, ReplayMiss
from .models import Task
from .pipeline import PipelineContext, run_check_pipeline
from .verification import VERIFICATION_FAILED_FLAG

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_FIXTURE_MISS = 2
EXIT_PARTIAL_FAILURES = 3


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    parser.add_argument("--fixtures", dest="fixture_dir", default=None, help="fixture directory")
    parser.add_argument("--model", default=None, help="chat model id")
    parser.add_argument("--math-backend", dest="math_backend", choices=["deterministic", "llm"], default=None)
    parser.add_argument("--author-backend", dest="author_backend", choices=["deterministic", "llm"], default=None)
    parser.add_argument("--parallelism", type=int, default=None)
    parser.add_argument("--config", default=None, help="JSON or key=value config file")
    parser.add_argument("--llm-api-key", dest="llm_api_key", default=None)
    parser.add_argument("--search-api-key", dest="search_api_key", default=None)
    parser.add_argument("--sandbox-cmd", dest="sandbox_cmd", default=None)


_CONFIG_KEYS = (
    "mode",
    "fixture_dir",
    "model",
    "math_backend",
    "author_backend",
    "parallelism",
    "llm_api_key",
    "search_api_key",
    "sandbox_cmd",
)


def _config_from_args(args: argparse.Namespace, **overrides):
    cli = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    cli.update(overrides)
    return build_config(cli=cli, config_file=getattr(args, "config", None))


def _read_text_arg(value: str | None, file_value: str | None, name: str) -> str:
    if value is not None:
        return value
    if file_value is not None:
        return Path(file_value).read_text(encoding="utf-8")
    raise ConfigError(f"provide --{name} or --{name}-file")


def _cmd_check(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    ctx = PipelineContext(config)
    rows = []
    try:
        if args.input:
            loaded = load_dataset(args.input, args.task)
            if loaded.errors:
                for lineno, message in loaded.errors:
                    logger.warning("%s line %d: %s", args.input, lineno, message)
            for example in loaded.examples:
                result = run_check_pipeline(
                    example.task,
                    example.prompt,
                    example.response,
                    ctx,
                    entry_point=example.entry_point,
                )
                rows.append(
                    {
                        "task": example.task.value,
                        "prompt": example.prompt,
                        **result.to_dict(),
                    }
                )
        else:
            prompt = _read_text_arg(args.prompt, args.prompt_file, "prompt")
            response = _read_text_arg(args.response, args.response_file, "response")
            result = run_check_pipeline(
                Task(args.task), prompt, response, ctx, entry_point=args.entry_point
            )
            rows.append({"task": args.task, "prompt": prompt, **result.to_dict()})
    except ReplayMiss as miss:
        print(f"fixture miss: {miss.request_hash}", file=sys.stderr)
        return EXIT_FIXTURE_MISS
    finally:
        ctx.close()

    lines = [json.dumps(row, sort_keys=True, ensure_ascii=False) for row in rows]
    if args.output:
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        for line in lines:
            print(line)
    partial = any(
        VERIFICATION_FAILED_FLAG in verdict["flags"]
        for row in rows
        for verdict in row["verdict"]["claim_verdicts"]
    )
    return EXIT_PARTIAL_FAILURES if partial else EXIT_OK


def _cmd_extract(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    ctx = PipelineContext(config)
    task = Task(args.task)
    response = _read_text_arg(args.response, args.response_file, "response")
    try:
        if task == Task.KBQA:
            claims = extract_kb_claims(ctx.gateway, response)
        elif task == Task.CODE:
            claims = extract_code_claims(response)
        elif task == Task.MATH:
            claims = extract_math_claims(ctx.gateway, args.prompt or "", response)
        else:
            claims = extract_citation_claims(ctx.gateway, response)
    except ReplayMiss as miss:
        print(f"fixture miss: {miss.request_hash}", file=sys.stderr)
        return EXIT_FIXTURE_MISS
    finally:
        ctx.close()
    print(json.dumps([c.to_dict() for c in claims], sort_keys=True, ensure_ascii=False))
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    ctx = PipelineContext(config)
    try:
        if args.experiment == "extraction":
            summary = score_extraction_experiment(args.dataset[0].split("=", 1)[-1], ctx)
            print(json.dumps(summary, indent=2, sort_keys=True))
            return EXIT_OK
        tasks = []
        dataset_paths = {}
        for spec_arg in args.dataset:
            name, _, path = spec_arg.partition("=")
            task = Task(name)
            tasks.append(task)
            dataset_paths[task] = path
        exp = ExperimentConfig(
            tasks=tasks,
            dataset_paths=dataset_paths,
            method=args.method,
            out_dir=Path(args.output) if args.output else None,
        )
        report = run_experiment(exp, ctx)
    except ReplayMiss as miss:
        print(f"fixture miss: {miss.request_hash}", file=sys.stderr)
        return EXIT_FIXTURE_MISS
    finally:
        ctx.close()
    print(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
    if report["replay_misses"]:
        return EXIT_FIXTURE_MISS
    return EXIT_OK


def _cmd_audit(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    ctx = PipelineContext(config)
    try:
        report = audit_chatbots(args.directory, ctx)
    except ReplayMiss as miss:
        print(f"fixture miss: {miss.request_hash}", file=sys.stderr)
        return EXIT_FIXTURE_MISS
    finally:
        ctx.close()
    print(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
    if args.output:
        Path(args.output).write_text(
            json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def _cmd_record_fixtures(args: argparse.Namespace) -> int:
    config = _config_from_args(args, mode="record")
    ctx = PipelineContext(config)
    try:
        loaded = load_dataset(args.input, args.task)
        for example in loaded.examples:
            run_check_pipeline(
                example.task, example.prompt, example.response, ctx, entry_point=example.entry_point
            )
    finally:
        ctx.close()
    print(f"recorded fixtures for {len(loaded.examples)} examples under {config.fixture_dir}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .httpapi import create_app

    config = _config_from_args(args)
    host, _, port = args.bind.partition(":")
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="verifact", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check one response or a JSONL batch")
    check.add_argument("--task", required=True, choices=[t.value for t in Task])
    check.add_argument("--prompt", default=None)
    check.add_argument("--prompt-file", default=None)
    check.add_argument("--response", default=None)
    check.add_argument("--response-file", default=None)
    check.add_argument("--entry-point", dest="entry_point", default=None)
    check.add_argument("--input", default=None, help="JSONL dataset to check in batch")
    check.add_argument("--output", default=None, help="write results JSONL here")
    _add_common_flags(check)
    check.set_defaults(func=_cmd_check)

    extract = sub.add_parser("extract", help="extract claims only")
    extract.add_argument("--task", required=True, choices=[t.value for t in Task])
    extract.add_argument("--prompt", default=None)
    extract.add_argument("--response", default=None)
    extract.add_argument("--response-file", default=None)
    _add_common_flags(extract)
    extract.set_defaults(func=_cmd_extract)

    evaluate = sub.add_parser("eval", help="batch evaluation with metrics tables")
    evaluate.add_argument(
        "--dataset",
        action="append",
        required=True,
        help="task=path.jsonl (repeatable)",
    )
    evaluate.add_argument("--method", default="pipeline", choices=["pipeline", "self_check_0", "self_check_3"])
    evaluate.add_argument("--experiment", default="metrics", choices=["metrics", "extraction"])
    evaluate.add_argument("--output", default=None, help="report directory")
    _add_common_flags(evaluate)
    evaluate.set_defaults(func=_cmd_eval)

    audit = sub.add_parser("audit", help="weighted audit over chatbot response files")
    audit.add_argument("--directory", required=True)
    audit.add_argument("--output", default=None)
    _add_common_flags(audit)
    audit.set_defaults(func=_cmd_audit)

    record = sub.add_parser("record-fixtures", help="run live and persist fixtures")
    record.add_argument("--task", required=True, choices=[t.value for t in Task])
    record.add_argument("--input", required=True, help="JSONL dataset")
    _add_common_flags(record)
    record.set_defaults(func=_cmd_record_fixtures)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--bind", default="127.0.0.1:8080")
    _add_common_flags(serve)
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (TransportError, SearchTransportError, ScholarTransportError, SandboxError) as exc:
        print(f"tool error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
