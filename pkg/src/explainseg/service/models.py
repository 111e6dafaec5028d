"""Request/response models for the feedback API."""
from __future__ import annotations

from pydantic import BaseModel


class QuestionSummary(BaseModel):
    id: str
    title: str
    language: str
    line_count: int


class QuestionDetail(BaseModel):
    id: str
    title: str
    code: str
    max_attempts: int


class SegmentRequest(BaseModel):
    explanation: str
    session_id: str


class Span(BaseModel):
    start: int
    end: int


class FeedbackGroup(BaseModel):
    color_index: int
    portion: str
    explanation_span: Span | None = None
    code_lines: list[int]


class FeedbackBar(BaseModel):
    post_count: int
    max_segments: int


class AttemptInfo(BaseModel):
    used: int
    max: int


class FeedbackPayload(BaseModel):
    groups: list[FeedbackGroup]
    bar: FeedbackBar
    level: str
    warnings: list[str]
    attempt: AttemptInfo
