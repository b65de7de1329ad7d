"""Command-line interface: extract, serve, eval, gen-records, split, emit-config.

Exit codes: 0 success, 1 validation error, 2 backend error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import dataset, evaluation
from .inference_client import (
    BackendError,
    BackendUnreachable,
    InferenceClient,
    InferenceError,
    Timeout,
    UnknownModel,
)
from .output_parser import report_from_dict
from .schema import default_schema
from .service import ServiceConfig, create_app, load_service_config, run_extraction

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BACKEND = 2


def _fail(message: str, code: int = EXIT_VALIDATION) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_config(path: str | None) -> ServiceConfig:
    return load_service_config(path) if path else ServiceConfig()


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def cmd_extract(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args.config)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot load config: {exc}")
    try:
        article = _read_input(args.input)
    except OSError as exc:
        return _fail(f"cannot read input: {exc}")
    if not article.strip():
        return _fail("article is empty")
    if not 1 <= args.max_tokens <= config.max_tokens_limit:
        return _fail(f"max_tokens must be in [1, {config.max_tokens_limit}]")

    client = InferenceClient(models=config.models, timeout=config.request_timeout,
                             retries=config.retries)
    schema = default_schema(death_host_extension=config.death_host_extension)
    model_id = args.model or config.models[0].id
    try:
        spec = client.get_model(model_id)
        response = run_extraction(client, schema, spec, article, args.max_tokens,
                                  strict=args.strict)
    except UnknownModel as exc:
        return _fail(str(exc))
    except (Timeout, BackendUnreachable, BackendError, InferenceError) as exc:
        return _fail(str(exc), EXIT_BACKEND)
    finally:
        client.close()

    if args.format == "raw":
        print(response["raw"])
    elif args.format == "annotated":
        print(json.dumps(response["annotated"], ensure_ascii=False, indent=2))
    else:
        print(json.dumps(response["relations"], ensure_ascii=False, indent=2))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    try:
        config = _load_config(args.config)
        app = create_app(config)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot start service: {exc}")
    ui_dir = args.ui_dir or os.environ.get("EPIREL_UI_DIR")
    if ui_dir and Path(ui_dir).is_dir():
        from .service import mount_static_ui

        mount_static_ui(app, ui_dir)
    port = int(os.environ.get("EPIREL_PORT", args.port))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return EXIT_OK


def _load_predictions(path: str) -> dict:
    preds = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            doc_id = obj.get("doc_id")
            if doc_id is None:
                raise ValueError(f"{path}:{lineno}: prediction line missing doc_id")
            preds[doc_id] = report_from_dict(obj)
    return preds


def cmd_eval(args: argparse.Namespace) -> int:
    from .output_parser import ParseReport

    try:
        gold_docs = evaluation.read_gold_jsonl(args.gold)
        preds = _load_predictions(args.pred)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"cannot load corpus: {exc}")
    gold_ids = {d.doc_id for d in gold_docs}
    unknown = sorted(set(preds) - gold_ids)
    if unknown:
        return _fail(f"prediction doc_ids not in gold corpus: {', '.join(unknown)}")
    pairs = [(doc, preds.get(doc.doc_id, ParseReport())) for doc in gold_docs]
    try:
        report = evaluation.evaluate_corpus(pairs)
    except evaluation.DuplicateDocId as exc:
        return _fail(f"duplicate doc_id: {exc}")
    if args.json:
        print(json.dumps(evaluation.eval_report_to_dict(report), ensure_ascii=False, indent=2))
    else:
        print(evaluation.format_eval_table(report, label=args.label))
    return EXIT_OK


def cmd_gen_records(args: argparse.Namespace) -> int:
    try:
        examples, errors = dataset.read_jsonl(args.input)
    except OSError as exc:
        return _fail(f"cannot read corpus: {exc}")
    for err in errors:
        print(f"warning: {args.input}:{err.line}: {err.message}", file=sys.stderr)
    if errors and args.strict:
        return _fail(f"{len(errors)} bad corpus lines")
    try:
        records = [dataset.to_training_record(e) for e in examples]
    except dataset.ValidationFailure as exc:
        return _fail(str(exc))
    with open(args.output, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} records to {args.output}")
    return EXIT_OK


def cmd_split(args: argparse.Namespace) -> int:
    try:
        examples, errors = dataset.read_jsonl(args.input)
    except OSError as exc:
        return _fail(f"cannot read corpus: {exc}")
    for err in errors:
        print(f"warning: {args.input}:{err.line}: {err.message}", file=sys.stderr)
    try:
        train, val = dataset.split(examples, args.val_fraction, args.seed)
    except ValueError as exc:
        return _fail(str(exc))
    dataset.write_jsonl(args.train_output, train)
    dataset.write_jsonl(args.val_output, val)
    print(f"split {len(examples)} examples into {len(train)} train / {len(val)} val")
    return EXIT_OK


def cmd_emit_config(args: argparse.Namespace) -> int:
    text = dataset.emit_finetune_config(args.base_model)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote config to {args.output}")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epirel",
        description="Relation extraction pipeline for infectious-disease news articles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run the pipeline on one article")
    p.add_argument("--model", help="model id (default: first registered model)")
    p.add_argument("--max-tokens", type=int, default=1024)
    p.add_argument("--input", required=True, help="article file, or - for stdin")
    p.add_argument("--format", choices=("raw", "json", "annotated"), default="json")
    p.add_argument("--config", help="models TOML file")
    p.add_argument("--strict", action="store_true",
                   help="treat parser warnings as rejections")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", help="models TOML file")
    p.add_argument("--ui-dir", help="directory of built UI assets to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="score predictions against a gold corpus")
    p.add_argument("--gold", required=True, help="gold JSONL file")
    p.add_argument("--pred", required=True,
                   help="JSONL of parse-report objects with doc_id")
    p.add_argument("--label", default="corpus", help="model label for the table")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen-records", help="corpus JSONL -> training records JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--strict", action="store_true", help="fail on bad corpus lines")
    p.set_defaults(func=cmd_gen_records)

    p = sub.add_parser("split", help="deterministic train/validation split")
    p.add_argument("--input", required=True)
    p.add_argument("--val-fraction", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--train-output", required=True)
    p.add_argument("--val-output", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("emit-config", help="emit the fine-tuning configuration")
    p.add_argument("--base-model", required=True)
    p.add_argument("--output", help="write to file instead of stdout")
    p.set_defaults(func=cmd_emit_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
