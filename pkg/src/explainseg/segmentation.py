"""Parse raw mapping JSON into a validated, line-resolved segment mapping.

Verification failures never reject a group: the group count still feeds the
threshold classifier, so problems are recorded as flags plus warnings.
"""
from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, replace

from .backends import Provenance, RawMappingText
from .corpus import CodeSnippet, Question, normalize_line
from .errors import MalformedJson, SchemaViolation

_TRIM_CHARS = string.punctuation + string.whitespace


@dataclass(frozen=True)
class SegmentGroup:
    code_text: str
    explanation_portion: str
    resolved_lines: frozenset[int]
    portion_verified: bool
    lines_verified: bool


@dataclass(frozen=True)
class SegmentMapping:
    groups: tuple[SegmentGroup, ...]
    provenance: Provenance
    warnings: tuple[str, ...] = ()

    @property
    def raw_count(self) -> int:
        return len(self.groups)


def verify_portion(portion: str, response_text: str) -> bool:
    """True iff the portion (surrounding punctuation aside) occurs verbatim in
    the response, comparing case- and whitespace-insensitively."""
    trimmed = portion.strip(_TRIM_CHARS)
    needle = normalize_line(trimmed).lower()
    if not needle:
        return False
    return needle in normalize_line(response_text).lower()


def locate_portion(portion: str, text: str) -> tuple[int, int] | None:
    """Character span of the first occurrence of a verified portion in the
    submitted text, tolerating whitespace and case differences."""
    trimmed = portion.strip(_TRIM_CHARS)
    words = trimmed.split()
    if not words:
        return None
    pattern = re.compile(r"\s+".join(re.escape(w) for w in words), re.IGNORECASE)
    match = pattern.search(text)
    if match is None:
        return None
    return match.start(), match.end()


def resolve_code_lines(code_text: str, snippet: CodeSnippet) -> tuple[frozenset[int], bool]:
    """Match each non-empty line of a group's code text to a snippet line.

    Duplicate normalized lines (two ``}`` lines, say) are consumed left to
    right so a group can legitimately claim several identical lines.
    """
    candidates: dict[str, list[int]] = {}
    for line, norm in zip(snippet.lines, snippet.normalized_lines):
        candidates.setdefault(norm, []).append(line.index)

    consumed: set[int] = set()
    all_matched = True
    for raw_line in code_text.splitlines():
        norm = normalize_line(raw_line)
        if not norm:
            continue
        index = next(
            (i for i in candidates.get(norm, []) if i not in consumed), None
        )
        if index is None:
            all_matched = False
        else:
            consumed.add(index)
    return frozenset(consumed), all_matched


def _schema_error(path: str, detail: str) -> SchemaViolation:
    return SchemaViolation(path, detail)


def validate_mapping_json(text: str) -> list[dict]:
    """Validate raw text against the mapping schema, returning the group dicts.

    Raises MalformedJson with a byte offset, or SchemaViolation with the JSON
    path of the offending element.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(exc.msg, exc.pos) from None

    if not isinstance(data, dict):
        raise _schema_error("$", f"expected object, got {type(data).__name__}")
    extra = set(data) - {"groups"}
    if extra:
        raise _schema_error("$", f"unexpected keys {sorted(extra)}")
    if "groups" not in data:
        raise _schema_error("$", "missing required key 'groups'")
    groups = data["groups"]
    if not isinstance(groups, list):
        raise _schema_error("$.groups", f"expected array, got {type(groups).__name__}")
    for i, item in enumerate(groups):
        path = f"$.groups[{i}]"
        if not isinstance(item, dict):
            raise _schema_error(path, f"expected object, got {type(item).__name__}")
        extra = set(item) - {"code", "explanation_portion"}
        if extra:
            raise _schema_error(path, f"unexpected keys {sorted(extra)}")
        for key in ("code", "explanation_portion"):
            if key not in item:
                raise _schema_error(path, f"missing required key '{key}'")
            if not isinstance(item[key], str):
                raise _schema_error(
                    f"{path}.{key}",
                    f"expected string, got {type(item[key]).__name__}",
                )
    return groups


def parse_mapping(
    raw: RawMappingText, question: Question, response_text: str
) -> SegmentMapping:
    """Validate raw mapping JSON, resolve code lines, and verify portions."""
    group_dicts = validate_mapping_json(raw.text)
    snippet = question.snippet

    groups: list[SegmentGroup] = []
    warnings: list[str] = []
    for i, item in enumerate(group_dicts):
        resolved, lines_ok = resolve_code_lines(item["code"], snippet)
        portion_ok = verify_portion(item["explanation_portion"], response_text)
        if not lines_ok:
            warnings.append(f"group {i}: code text not fully matched to snippet lines")
        if not portion_ok:
            warnings.append(f"group {i}: explanation portion not found in response")
        groups.append(
            SegmentGroup(
                code_text=item["code"],
                explanation_portion=item["explanation_portion"],
                resolved_lines=resolved,
                portion_verified=portion_ok,
                lines_verified=lines_ok,
            )
        )
    return SegmentMapping(
        groups=tuple(groups), provenance=raw.provenance, warnings=tuple(warnings)
    )


def with_groups(mapping: SegmentMapping, groups: tuple[SegmentGroup, ...]) -> SegmentMapping:
    return replace(mapping, groups=groups)
