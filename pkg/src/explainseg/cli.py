"""Operator entry point: segment one response, grade batches, evaluate, serve.

Exit codes: 2 for configuration/input problems, 3 for backend failures,
4 for unparseable backend output.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .backends import BackendConfig, BackendKind, make_backend
from .corpus import (
    HumanLabel,
    Level,
    StudentResponse,
    load_question,
    load_question_bank,
    load_responses,
    parse_label,
)
from .errors import (
    BackendError,
    BadThreshold,
    CorpusError,
    EvaluationError,
    ExplainsegError,
    MappingParseError,
)
from .evaluation import (
    DEFAULT_THRESHOLDS,
    FilterPolicy,
    group_by_question,
    records_from_rows,
    report_to_csv,
    report_to_json,
    sweep,
)
from .pipeline import (
    DEFAULT_RULES,
    DEFAULT_THRESHOLD,
    grade_many,
    grade_response,
    load_results,
    result_to_dict,
    write_results,
)

EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_PARSE = 4

logger = logging.getLogger(__name__)


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend",
        choices=["rule-based", "mock", "remote"],
        default="rule-based",
        help="completion backend (default: rule-based, fully offline)",
    )
    parser.add_argument("--model", default="gpt-4o", help="remote model name")
    parser.add_argument("--base-url", default=None, help="remote API base URL")
    parser.add_argument(
        "--threshold",
        type=int,
        default=DEFAULT_THRESHOLD,
        help="segment count above which a response is multistructural",
    )
    parser.add_argument(
        "--no-postprocess",
        action="store_true",
        help="disable the signature-only removal rule",
    )


def _backend_config(args: argparse.Namespace, concurrency: int = 4) -> BackendConfig:
    kind = {
        "rule-based": BackendKind.RULE_BASED,
        "mock": BackendKind.MOCK,
        "remote": BackendKind.REMOTE,
    }[args.backend]
    return BackendConfig(
        kind=kind,
        base_url=args.base_url,
        model_name=args.model,
        concurrency_limit=max(concurrency, 1),
    )


def _rules(args: argparse.Namespace):
    return () if args.no_postprocess else DEFAULT_RULES


def _check_threshold(threshold: int) -> int:
    if threshold < 1:
        raise BadThreshold(threshold)
    return threshold


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="explainseg",
        description="Classify code explanations as relational or multistructural.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_segment = sub.add_parser("segment", help="classify a single explanation")
    p_segment.add_argument("--question", required=True, help="question JSON file")
    group = p_segment.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", help="the explanation text")
    group.add_argument("--stdin", action="store_true", help="read explanation from stdin")
    p_segment.add_argument(
        "--detect-signature",
        action="store_true",
        help="infer the signature line when the question file omits it",
    )
    _add_backend_flags(p_segment)

    p_batch = sub.add_parser("batch", help="grade a file of responses")
    p_batch.add_argument("--questions", required=True, help="question bank directory")
    p_batch.add_argument("--responses", required=True, help="responses JSONL or CSV")
    p_batch.add_argument("--out", required=True, help="results JSONL path")
    p_batch.add_argument("--concurrency", type=int, default=4)
    _add_backend_flags(p_batch)

    for name in ("evaluate", "sweep"):
        p_eval = sub.add_parser(name, help="score results against human labels")
        p_eval.add_argument("--results", required=True, help="results JSONL from batch")
        p_eval.add_argument(
            "--labels",
            default=None,
            help="labels file (JSONL/CSV with response_id and human_label); "
            "defaults to labels embedded in the results",
        )
        p_eval.add_argument(
            "--thresholds",
            default=",".join(str(t) for t in DEFAULT_THRESHOLDS),
            help="comma-separated thresholds (default 1,2,3,4)",
        )
        p_eval.add_argument(
            "--positive-class",
            choices=[level.value for level in Level],
            default=Level.MULTISTRUCTURAL.value,
        )
        p_eval.add_argument(
            "--policy",
            choices=[p.value for p in FilterPolicy],
            default=FilterPolicy.EXCLUDE_INCORRECT.value,
        )
        p_eval.add_argument(
            "--use-raw-counts",
            action="store_true",
            help="score raw (pre-rule) counts instead of post-processed counts",
        )
        p_eval.add_argument(
            "--per-question",
            action="store_true",
            help="also write one report pair per question (default is pooled only)",
        )
        p_eval.add_argument("--out", default="report", help="output path prefix")

    p_serve = sub.add_parser("serve", help="run the feedback HTTP service")
    p_serve.add_argument("--questions", required=True, help="question bank directory")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--static", default=None, help="directory of built UI assets")
    p_serve.add_argument("--sessions", default=None, help="attempt-counter snapshot file")
    _add_backend_flags(p_serve)

    return parser


def _cmd_segment(args: argparse.Namespace) -> int:
    question = load_question(args.question, detect_signature=args.detect_signature)
    text = sys.stdin.read() if args.stdin else args.text
    threshold = _check_threshold(args.threshold)
    backend = make_backend(_backend_config(args), {question.id: question})
    response = StudentResponse(question_id=question.id, response_id="cli", text=text)
    result = grade_response(question, response, backend, _rules(args), threshold)
    print(json.dumps(result_to_dict(result), indent=2))
    print(
        f"{question.id}: {result.level.value} "
        f"(raw {result.raw_count}, post {result.post_count}, threshold {threshold})",
        file=sys.stderr,
    )
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    bank = load_question_bank(args.questions)
    responses = load_responses(args.responses)
    threshold = _check_threshold(args.threshold)
    backend = make_backend(_backend_config(args, args.concurrency), bank)
    rows = grade_many(
        bank,
        responses,
        backend,
        rules=_rules(args),
        threshold=threshold,
        concurrency=args.concurrency,
    )
    write_results(rows, args.out)
    failures = sum(1 for r in rows if not hasattr(r, "level"))
    print(f"wrote {len(rows)} rows to {args.out} ({failures} failures)", file=sys.stderr)
    return 0


def _load_labels(path: str) -> dict[str, HumanLabel]:
    labels: dict[str, HumanLabel] = {}
    p = Path(path)
    if p.suffix.lower() == ".csv":
        with p.open(encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    else:
        with p.open(encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
    for row in rows:
        raw = row.get("human_label")
        if raw in (None, ""):
            continue
        labels[row["response_id"]] = parse_label(raw, path)
    return labels


def _cmd_eval(args: argparse.Namespace) -> int:
    rows = load_results(args.results)
    records, embedded = records_from_rows(rows)
    labels = _load_labels(args.labels) if args.labels else embedded
    thresholds = [int(t) for t in args.thresholds.split(",") if t.strip()]
    for t in thresholds:
        _check_threshold(t)
    def run_sweep(subset, corpus):
        return sweep(
            subset,
            labels,
            thresholds=thresholds,
            use_post_counts=not args.use_raw_counts,
            positive_class=Level(args.positive_class),
            policy=FilterPolicy(args.policy),
            corpus=corpus,
        )

    report = run_sweep(records, args.results)
    json_path = Path(args.out + ".json")
    csv_path = Path(args.out + ".csv")
    json_path.write_text(report_to_json(report), encoding="utf-8")
    csv_path.write_text(report_to_csv(report), encoding="utf-8")
    if args.per_question:
        for question_id, subset in group_by_question(records).items():
            per_question = run_sweep(subset, f"{args.results}#{question_id}")
            prefix = f"{args.out}.{question_id}"
            Path(prefix + ".json").write_text(report_to_json(per_question), encoding="utf-8")
            Path(prefix + ".csv").write_text(report_to_csv(per_question), encoding="utf-8")

    headline = next(
        (r for r in report.rows if r.threshold == DEFAULT_THRESHOLD), report.rows[0]
    )
    print(
        f"threshold={headline.threshold} agreement={headline.metrics.p_o:.3f} "
        f"kappa={headline.metrics.kappa:.3f} f1={headline.metrics.f1:.3f} "
        f"precision={headline.metrics.precision:.3f} recall={headline.metrics.recall:.3f}"
    )
    print(f"wrote {json_path} and {csv_path}", file=sys.stderr)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    bank = load_question_bank(args.questions)
    threshold = _check_threshold(args.threshold)
    backend = make_backend(_backend_config(args), bank)
    app = create_app(
        bank,
        backend,
        threshold=threshold,
        rules=_rules(args),
        static_dir=args.static,
        sessions_path=args.sessions,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {
        "segment": _cmd_segment,
        "batch": _cmd_batch,
        "evaluate": _cmd_eval,
        "sweep": _cmd_eval,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (CorpusError, BadThreshold, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, NotADirectoryError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MappingParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except ExplainsegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
