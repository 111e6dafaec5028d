"""Load, validate, and normalize questions, student responses, and human labels.

All types here are immutable after load and safe to share across threads.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path

from .errors import (
    BadLabel,
    BadLineIndex,
    DuplicateResponseId,
    InvalidField,
    MissingField,
    NoFewShot,
)

ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")

DEFAULT_MAX_ATTEMPTS = 20


class Level(str, Enum):
    """Comprehension level assigned by the classifier."""

    MULTISTRUCTURAL = "multistructural"
    RELATIONAL = "relational"


class HumanLabel(str, Enum):
    """Label assigned by a human rater to a student response."""

    MULTISTRUCTURAL_CORRECT = "multistructural_correct"
    RELATIONAL_CORRECT = "relational_correct"
    INCORRECT = "incorrect"


def normalize_line(text: str) -> str:
    """Strip surrounding whitespace and collapse internal runs to single spaces."""
    return " ".join(text.split())


def is_punctuation_only(text: str) -> bool:
    """True for blank lines and lines with no alphanumeric content (braces etc.)."""
    return not any(ch.isalnum() for ch in text)


@dataclass(frozen=True)
class CodeLine:
    index: int  # 1-based
    text: str


@dataclass(frozen=True)
class CodeSnippet:
    """A code listing split into indexed lines plus normalized shadows."""

    raw: str
    lines: tuple[CodeLine, ...]
    normalized_lines: tuple[str, ...]

    @property
    def line_count(self) -> int:
        return len(self.lines)

    def substantive_indices(self) -> tuple[int, ...]:
        """Indices of lines that are neither blank nor punctuation-only."""
        return tuple(
            line.index
            for line, norm in zip(self.lines, self.normalized_lines)
            if not is_punctuation_only(norm)
        )


def split_lines(code: str) -> CodeSnippet:
    """Split raw code into 1-indexed lines, keeping blank lines in place."""
    texts = code.splitlines()
    lines = tuple(CodeLine(i + 1, text) for i, text in enumerate(texts))
    normalized = tuple(normalize_line(text) for text in texts)
    return CodeSnippet(raw=code, lines=lines, normalized_lines=normalized)


@dataclass(frozen=True)
class MappingPair:
    """One (code text, explanation portion) pair in a mapping."""

    code: str
    explanation_portion: str


@dataclass(frozen=True)
class FewShotExample:
    explanation: str
    groups: tuple[MappingPair, ...]
    intended_level: Level


@dataclass(frozen=True)
class Question:
    """An authored exercise: code, signature designation, few-shot exemplars."""

    id: str
    title: str
    code: str
    language_tag: str
    signature_line_indices: frozenset[int]
    few_shot: tuple[FewShotExample, ...]
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    @cached_property
    def snippet(self) -> CodeSnippet:
        return split_lines(self.code)


@dataclass(frozen=True)
class StudentResponse:
    question_id: str
    response_id: str
    text: str
    human_label: HumanLabel | None = None


def parse_label(raw: str, where: str = "") -> HumanLabel:
    try:
        return HumanLabel(raw.strip())
    except ValueError:
        raise BadLabel(raw, where) from None


def _detect_signature_line(snippet: CodeSnippet) -> int:
    # Fallback heuristic: first line that opens a parameter list and a body.
    for line, norm in zip(snippet.lines, snippet.normalized_lines):
        if "(" in norm and norm.endswith("{"):
            return line.index
    raise BadLineIndex("signature_lines", "no line looks like a signature")


def question_from_dict(data: dict, path: str = "", detect_signature: bool = False) -> Question:
    """Build and validate a Question from its JSON object form."""
    for f in ("id", "title", "code"):
        if f not in data:
            raise MissingField(f, path)
    qid = data["id"]
    if not isinstance(qid, str) or not ID_PATTERN.match(qid):
        raise InvalidField("id", f"{qid!r} must match [A-Za-z0-9_-]+", path)

    code = data["code"]
    snippet = split_lines(code)

    raw_signature = data.get("signature_lines")
    if raw_signature is None:
        if detect_signature:
            raw_signature = [_detect_signature_line(snippet)]
        else:
            raise MissingField("signature_lines", path)
    if not raw_signature:
        raise BadLineIndex("signature_lines", "must name at least one line", path)
    for idx in raw_signature:
        if not isinstance(idx, int) or not 1 <= idx <= snippet.line_count:
            raise BadLineIndex(
                "signature_lines",
                f"index {idx!r} outside 1..{snippet.line_count}",
                path,
            )

    if "few_shot" not in data or not data["few_shot"]:
        raise NoFewShot("at least one example is required", path)
    few_shot = tuple(
        _parse_fewshot(entry, snippet, f"{path}:few_shot[{i}]")
        for i, entry in enumerate(data["few_shot"])
    )
    levels = {ex.intended_level for ex in few_shot}
    if Level.MULTISTRUCTURAL not in levels or Level.RELATIONAL not in levels:
        raise NoFewShot(
            "need at least one multistructural and one relational example", path
        )

    max_attempts = data.get("max_attempts", DEFAULT_MAX_ATTEMPTS)
    if not isinstance(max_attempts, int) or max_attempts < 1:
        raise InvalidField("max_attempts", f"{max_attempts!r} must be a positive int", path)

    return Question(
        id=qid,
        title=data["title"],
        code=code,
        language_tag=data.get("language", ""),
        signature_line_indices=frozenset(raw_signature),
        few_shot=few_shot,
        max_attempts=max_attempts,
    )


def _parse_fewshot(entry: dict, snippet: CodeSnippet, path: str) -> FewShotExample:
    for f in ("explanation", "intended_level", "groups"):
        if f not in entry:
            raise MissingField(f, path)
    try:
        level = Level(entry["intended_level"])
    except ValueError:
        raise InvalidField("intended_level", repr(entry["intended_level"]), path) from None
    if not entry["groups"]:
        raise NoFewShot("example has an empty mapping", path)

    # Deferred to avoid a module cycle: segmentation needs normalize_line.
    from .segmentation import resolve_code_lines, verify_portion

    explanation = entry["explanation"]
    groups = []
    for j, g in enumerate(entry["groups"]):
        gpath = f"{path}.groups[{j}]"
        for f in ("code", "explanation_portion"):
            if f not in g:
                raise MissingField(f, gpath)
        portion = g["explanation_portion"]
        # Both checks keep authored exemplars honest: the mapping the model is
        # shown must itself verify against the exemplar explanation and code.
        if not verify_portion(portion, explanation):
            raise InvalidField(
                "explanation_portion",
                f"{portion!r} is not a substring of the example explanation",
                gpath,
            )
        _, lines_ok = resolve_code_lines(g["code"], snippet)
        if not lines_ok:
            raise InvalidField(
                "code", "does not match the question's code lines", gpath
            )
        groups.append(MappingPair(code=g["code"], explanation_portion=portion))
    return FewShotExample(
        explanation=explanation, groups=tuple(groups), intended_level=level
    )


def load_question(path: str | Path, detect_signature: bool = False) -> Question:
    """Load one question from its JSON file."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        data = json.load(fh)
    return question_from_dict(data, path=str(path), detect_signature=detect_signature)


def load_question_bank(directory: str | Path) -> dict[str, Question]:
    """Load every *.json question in a directory, keyed and ordered by id."""
    directory = Path(directory)
    questions = [load_question(p) for p in sorted(directory.glob("*.json"))]
    bank: dict[str, Question] = {}
    for q in sorted(questions, key=lambda q: q.id):
        if q.id in bank:
            raise InvalidField("id", f"duplicate question id {q.id!r}", str(directory))
        bank[q.id] = q
    return bank


def _response_from_record(record: dict, where: str) -> StudentResponse:
    for f in ("question_id", "response_id", "text"):
        if f not in record or record[f] is None:
            raise MissingField(f, where)
    text = record["text"]
    if not text.strip():
        raise InvalidField("text", "empty response text", where)
    label = None
    raw_label = record.get("human_label")
    if raw_label not in (None, ""):
        label = parse_label(raw_label, where)
    return StudentResponse(
        question_id=record["question_id"],
        response_id=record["response_id"],
        text=text,
        human_label=label,
    )


def load_responses(path: str | Path) -> list[StudentResponse]:
    """Load student responses from JSONL (canonical) or CSV, order preserved."""
    path = Path(path)
    responses: list[StudentResponse] = []
    if path.suffix.lower() == ".csv":
        with path.open(encoding="utf-8", newline="") as fh:
            for i, row in enumerate(csv.DictReader(fh)):
                responses.append(_response_from_record(row, f"{path}:row {i + 1}"))
    else:
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                if not line.strip():
                    continue
                record = json.loads(line)
                responses.append(_response_from_record(record, f"{path}:line {i + 1}"))
    seen: set[str] = set()
    for r in responses:
        if r.response_id in seen:
            raise DuplicateResponseId(r.response_id)
        seen.add(r.response_id)
    return responses
