"""Completion backends that turn a segmentation request into raw mapping JSON.

Three kinds: a remote OpenAI-compatible endpoint with structured output, a
mock that replays canned fixtures, and a deterministic rule-based aligner so
the whole toolchain runs with zero network and zero secrets.
"""
from __future__ import annotations

import hashlib
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from enum import Enum

import httpx

from .corpus import CodeSnippet, MappingPair, Question
from .errors import (
    BackendError,
    Exhausted,
    FixtureMissing,
    InvalidField,
    RateLimited,
    SchemaRefused,
    TransportError,
)
from .prompting import SegmentationRequest, response_text_of, serialize_mapping

logger = logging.getLogger(__name__)

API_KEY_ENV = "EIPL_API_KEY"
BASE_URL_ENV = "EIPL_BASE_URL"


class BackendKind(str, Enum):
    REMOTE = "remote"
    MOCK = "mock"
    RULE_BASED = "rule_based"


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind = BackendKind.RULE_BASED
    base_url: str | None = None
    model_name: str = "gpt-4o"
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0
    concurrency_limit: int = 4


@dataclass(frozen=True)
class Provenance:
    kind: str
    model_name: str
    retry_count: int = 0
    # Wall time is informational only; deterministic backends report 0.0 and
    # it is never serialized, so equal inputs keep producing equal bytes.
    wall_time: float = 0.0


@dataclass(frozen=True)
class RawMappingText:
    text: str
    provenance: Provenance


class Backend:
    """Base backend: bounds in-flight completions to config.concurrency_limit."""

    def __init__(self, config: BackendConfig):
        self.config = config
        self._limiter = threading.BoundedSemaphore(config.concurrency_limit)

    def complete(self, request: SegmentationRequest) -> RawMappingText:
        with self._limiter:
            return self._complete(request)

    def _complete(self, request: SegmentationRequest) -> RawMappingText:
        raise NotImplementedError


def _fixture_key(question_id: str, response_text: str) -> tuple[str, str]:
    digest = hashlib.sha256(response_text.encode("utf-8")).hexdigest()
    return (question_id, digest)


class MockBackend(Backend):
    """Replays canned mapping JSON keyed on (question_id, response hash)."""

    def __init__(self, config: BackendConfig | None = None):
        super().__init__(config or BackendConfig(kind=BackendKind.MOCK))
        self._fixtures: dict[tuple[str, str], str] = {}

    def register(self, question_id: str, response_text: str, mapping_text: str) -> None:
        self._fixtures[_fixture_key(question_id, response_text)] = mapping_text

    @classmethod
    def from_bank(cls, bank: dict[str, Question], config: BackendConfig | None = None) -> "MockBackend":
        """Seed fixtures from every question's own few-shot exemplars."""
        backend = cls(config)
        for question in bank.values():
            for example in question.few_shot:
                backend.register(
                    question.id, example.explanation, serialize_mapping(example.groups)
                )
        return backend

    def _complete(self, request: SegmentationRequest) -> RawMappingText:
        key = _fixture_key(request.question_id, response_text_of(request))
        try:
            text = self._fixtures[key]
        except KeyError:
            raise FixtureMissing(
                f"no fixture for question {request.question_id!r} and this response"
            ) from None
        return RawMappingText(
            text=text,
            provenance=Provenance(kind="mock", model_name=self.config.model_name),
        )


# --- rule-based baseline ------------------------------------------------------

_CLAUSE_SPLIT = re.compile(r"[^.;!]+")
_TOKEN = re.compile(r"[a-z0-9]+")
# Spelled-out digits unify with numeric literals ("zero" matches "0").
_NUMBER_WORDS = {
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4",
    "five": "5", "six": "6", "seven": "7", "eight": "8", "nine": "9",
}


def _tokens(text: str) -> frozenset[str]:
    return frozenset(
        _NUMBER_WORDS.get(tok, tok) for tok in _TOKEN.findall(text.lower())
    )


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    inter = len(a & b)
    if inter == 0:
        return 0.0
    return inter / len(a | b)


def _best_line(clause_tokens: frozenset[str], snippet: CodeSnippet) -> int | None:
    best_index = None
    best_score = 0.0
    for line, norm in zip(snippet.lines, snippet.normalized_lines):
        score = _jaccard(clause_tokens, _tokens(norm))
        if score > best_score:
            best_score = score
            best_index = line.index
    return best_index


def rule_based_segment(question: Question, response_text: str) -> RawMappingText:
    """Deterministic offline aligner: punctuation-split clauses to best-overlap lines.

    Clauses are split at sentence punctuation only; each clause goes to the
    code line with maximal token Jaccard overlap, zero-overlap clauses are
    dropped, and adjacent clauses on the same line merge into one group.
    """
    snippet = question.snippet
    aligned: list[tuple[int, int, int]] = []  # (line_index, span_start, span_end)
    for match in _CLAUSE_SPLIT.finditer(response_text):
        clause = match.group()
        if not clause.strip():
            continue
        line_index = _best_line(_tokens(clause), snippet)
        if line_index is None:
            continue
        start = match.start() + (len(clause) - len(clause.lstrip()))
        end = match.end() - (len(clause) - len(clause.rstrip()))
        aligned.append((line_index, start, end))

    # Merge adjacent clauses that landed on the same line.
    pairs: list[MappingPair] = []
    merged: list[list[int]] = []
    for entry in aligned:
        if merged and merged[-1][0] == entry[0]:
            merged[-1][2] = entry[2]
        else:
            merged.append(list(entry))
    for line_index, start, end in merged:
        portion = response_text[start:end].strip()
        code = snippet.lines[line_index - 1].text.strip()
        pairs.append(MappingPair(code=code, explanation_portion=portion))

    return RawMappingText(
        text=serialize_mapping(pairs),
        provenance=Provenance(kind="rule_based", model_name="rule-based"),
    )


class RuleBasedBackend(Backend):
    """Wraps rule_based_segment behind the backend interface."""

    def __init__(self, bank: dict[str, Question], config: BackendConfig | None = None):
        super().__init__(config or BackendConfig(kind=BackendKind.RULE_BASED))
        self._bank = bank

    def _complete(self, request: SegmentationRequest) -> RawMappingText:
        try:
            question = self._bank[request.question_id]
        except KeyError:
            raise FixtureMissing(
                f"rule-based backend has no question {request.question_id!r}"
            ) from None
        return rule_based_segment(question, response_text_of(request))


# --- remote -------------------------------------------------------------------

class RemoteBackend(Backend):
    """OpenAI-compatible chat-completions client with schema-constrained output."""

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        sleep=time.sleep,
    ):
        super().__init__(config)
        base_url = config.base_url or os.environ.get(BASE_URL_ENV)
        if not base_url:
            raise InvalidField(
                "base_url", f"remote backend needs --base-url or ${BASE_URL_ENV}"
            )
        api_key = os.environ.get(API_KEY_ENV)
        if not api_key:
            raise InvalidField("api_key", f"remote backend needs ${API_KEY_ENV} set")
        self._url = base_url.rstrip("/") + "/chat/completions"
        self._headers = {"Authorization": f"Bearer {api_key}"}
        self._client = client or httpx.Client(timeout=config.timeout)
        self._sleep = sleep
        self._base_delay = 0.5

    def _payload(self, request: SegmentationRequest) -> dict:
        return {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": m.role.value, "content": m.content} for m in request.messages
            ],
            "response_format": {
                "type": "json_schema",
                "json_schema": {
                    "name": "segmentation",
                    "strict": True,
                    "schema": request.schema,
                },
            },
        }

    def _post_once(self, payload: dict) -> str:
        try:
            response = self._client.post(self._url, json=payload, headers=self._headers)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code == 429:
            retry_after = response.headers.get("retry-after")
            raise RateLimited(
                "rate limited by server",
                retry_after=float(retry_after) if retry_after else None,
            )
        if response.status_code >= 500 or response.status_code == 408:
            raise TransportError(f"server returned {response.status_code}")
        if response.status_code == 400:
            raise SchemaRefused(f"backend rejected the request: {response.text[:200]}")
        if response.status_code != 200:
            raise BackendError(
                f"backend returned {response.status_code}: {response.text[:200]}"
            )
        message = response.json()["choices"][0]["message"]
        if message.get("refusal"):
            raise SchemaRefused(f"model refused: {message['refusal'][:200]}")
        content = message.get("content")
        if not content:
            raise SchemaRefused("model returned no content")
        return content

    def _complete(self, request: SegmentationRequest) -> RawMappingText:
        payload = self._payload(request)
        started = time.monotonic()
        last_delay = 0.0
        for attempt in range(self.config.max_retries + 1):
            try:
                text = self._post_once(payload)
            except (TransportError, RateLimited) as exc:
                if attempt == self.config.max_retries:
                    raise Exhausted(
                        f"gave up after {attempt} retries: {exc}"
                    ) from exc
                delay = self._base_delay * (2 ** attempt)
                if isinstance(exc, RateLimited) and exc.retry_after:
                    delay = max(delay, exc.retry_after)
                # Keep successive waits nondecreasing even if retry-after shrinks.
                delay = max(delay, last_delay)
                last_delay = delay
                logger.warning("retrying after %s (wait %.2fs)", exc, delay)
                self._sleep(delay)
                continue
            return RawMappingText(
                text=text,
                provenance=Provenance(
                    kind="remote",
                    model_name=self.config.model_name,
                    retry_count=attempt,
                    wall_time=time.monotonic() - started,
                ),
            )
        raise Exhausted("retry loop ended unexpectedly")  # pragma: no cover


def make_backend(
    config: BackendConfig, bank: dict[str, Question] | None = None
) -> Backend:
    """Build the backend named by config; mock/rule-based seed from the bank."""
    if config.kind == BackendKind.REMOTE:
        return RemoteBackend(config)
    if config.kind == BackendKind.MOCK:
        return MockBackend.from_bank(bank or {}, config)
    return RuleBasedBackend(bank or {}, config)
