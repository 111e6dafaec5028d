"""Post-process segment mappings and classify responses by segment count.

The one evaluated post-processing rule removes groups that map only to the
function signature; the rule chain is open so question authors can add their
own (e.g. dropping a default-return line).
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .backends import Backend
from .corpus import HumanLabel, Level, Question, StudentResponse, is_punctuation_only
from .errors import BadThreshold, ExplainsegError, InvalidField
from .prompting import build_request
from .segmentation import SegmentMapping, parse_mapping, with_groups

DEFAULT_THRESHOLD = 1

RuleFn = Callable[[SegmentMapping, Question], SegmentMapping]


@dataclass(frozen=True)
class PostRule:
    name: str
    transform: RuleFn


@dataclass(frozen=True)
class ClassificationResult:
    response_id: str
    question_id: str
    raw_count: int
    post_count: int
    threshold: int
    level: Level
    warnings: tuple[str, ...]
    post_mapping: SegmentMapping
    human_label: HumanLabel | None = None


def _substantive_lines(group_lines: frozenset[int], question: Question) -> frozenset[int]:
    normalized = question.snippet.normalized_lines
    return frozenset(
        i for i in group_lines if not is_punctuation_only(normalized[i - 1])
    )


def remove_signature_only_groups(
    mapping: SegmentMapping, question: Question
) -> SegmentMapping:
    """Drop groups whose substantive lines all lie on the signature.

    Brace- and blank-line indices are ignored when deciding, so a group of
    {signature, closing brace} still counts as signature-only, while a group
    spanning the signature and any body line is always kept.
    """
    signature = question.signature_line_indices
    kept = tuple(
        g
        for g in mapping.groups
        if not (
            (lines := _substantive_lines(g.resolved_lines, question))
            and lines <= signature
        )
    )
    return with_groups(mapping, kept)


SIGNATURE_RULE = PostRule("remove_signature_only_groups", remove_signature_only_groups)

DEFAULT_RULES: tuple[PostRule, ...] = (SIGNATURE_RULE,)


def drop_lines_rule(line_indices: Iterable[int]) -> PostRule:
    """Per-question rule dropping groups that map only to the given lines."""
    targets = frozenset(line_indices)

    def transform(mapping: SegmentMapping, question: Question) -> SegmentMapping:
        kept = tuple(
            g
            for g in mapping.groups
            if not (
                (lines := _substantive_lines(g.resolved_lines, question))
                and lines <= targets
            )
        )
        return with_groups(mapping, kept)

    return PostRule(f"drop_lines({sorted(targets)})", transform)


def apply_rules(
    mapping: SegmentMapping, rules: Sequence[PostRule], question: Question
) -> SegmentMapping:
    for rule in rules:
        mapping = rule.transform(mapping, question)
    return mapping


def classify(post_count: int, threshold: int) -> Level:
    """Multistructural when the count exceeds the threshold, else relational."""
    if threshold < 1:
        raise BadThreshold(threshold)
    if post_count > threshold:
        return Level.MULTISTRUCTURAL
    return Level.RELATIONAL


def grade_response(
    question: Question,
    response: StudentResponse,
    backend: Backend,
    rules: Sequence[PostRule] = DEFAULT_RULES,
    threshold: int = DEFAULT_THRESHOLD,
) -> ClassificationResult:
    """Request, parse, post-process, and classify one student response."""
    if threshold < 1:
        raise BadThreshold(threshold)
    try:
        request = build_request(question, response.text)
        raw = backend.complete(request)
        mapping = parse_mapping(raw, question, response.text)
    except ExplainsegError as exc:
        exc.response_id = response.response_id
        raise
    post = apply_rules(mapping, rules, question)

    warnings = list(mapping.warnings)
    if mapping.raw_count == 0:
        warnings.append("backend returned zero groups; classifying relational")
    elif len(post.groups) == 0:
        warnings.append("no segments remain after post-processing; classifying relational")

    post_count = len(post.groups)
    return ClassificationResult(
        response_id=response.response_id,
        question_id=question.id,
        raw_count=mapping.raw_count,
        post_count=post_count,
        threshold=threshold,
        level=classify(post_count, threshold),
        warnings=tuple(warnings),
        post_mapping=post,
        human_label=response.human_label,
    )


# --- batch grading -------------------------------------------------------------

@dataclass(frozen=True)
class GradeFailure:
    response_id: str
    question_id: str
    error_type: str
    message: str


BatchRow = ClassificationResult | GradeFailure


def grade_many(
    bank: dict[str, Question],
    responses: Sequence[StudentResponse],
    backend: Backend,
    rules: Sequence[PostRule] = DEFAULT_RULES,
    threshold: int = DEFAULT_THRESHOLD,
    concurrency: int = 1,
) -> list[BatchRow]:
    """Grade many responses concurrently, output re-ordered to input order.

    Individual failures become failure rows and the run continues; an
    unresolvable question_id aborts before any backend call.
    """
    for r in responses:
        if r.question_id not in bank:
            raise InvalidField(
                "question_id",
                f"response {r.response_id!r} names unknown question {r.question_id!r}",
            )

    def work(response: StudentResponse) -> BatchRow:
        try:
            return grade_response(
                bank[response.question_id], response, backend, rules, threshold
            )
        except ExplainsegError as exc:
            return GradeFailure(
                response_id=response.response_id,
                question_id=response.question_id,
                error_type=type(exc).__name__,
                message=str(exc),
            )

    if concurrency <= 1:
        return [work(r) for r in responses]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(work, responses))


# --- results JSONL ---------------------------------------------------------------

def result_to_dict(row: BatchRow) -> dict:
    if isinstance(row, GradeFailure):
        return {
            "response_id": row.response_id,
            "question_id": row.question_id,
            "error": {"type": row.error_type, "message": row.message},
        }
    out: dict = {
        "response_id": row.response_id,
        "question_id": row.question_id,
        "level": row.level.value,
        "threshold": row.threshold,
        "raw_count": row.raw_count,
        "post_count": row.post_count,
    }
    if row.human_label is not None:
        out["human_label"] = row.human_label.value
    out["warnings"] = list(row.warnings)
    out["provenance"] = {
        "kind": row.post_mapping.provenance.kind,
        "model_name": row.post_mapping.provenance.model_name,
        "retry_count": row.post_mapping.provenance.retry_count,
    }
    out["post_mapping"] = {
        "groups": [
            {"code": g.code_text, "explanation_portion": g.explanation_portion}
            for g in row.post_mapping.groups
        ]
    }
    return out


def write_results(rows: Iterable[BatchRow], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(result_to_dict(row)) + "\n")


def load_results(path: str | Path) -> list[dict]:
    """Read a results JSONL file back into row dicts (including failure rows)."""
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    return rows
