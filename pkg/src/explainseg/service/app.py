"""HTTP API for interactive segmentation feedback, plus static UI hosting."""
from __future__ import annotations

import logging
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from ..backends import Backend, BackendError, Exhausted, TransportError
from ..corpus import ID_PATTERN, Question, StudentResponse
from ..errors import MappingParseError
from ..pipeline import DEFAULT_RULES, DEFAULT_THRESHOLD, PostRule, grade_response
from ..segmentation import locate_portion
from .models import (
    AttemptInfo,
    FeedbackBar,
    FeedbackGroup,
    FeedbackPayload,
    QuestionDetail,
    QuestionSummary,
    SegmentRequest,
    Span,
)
from .sessions import AttemptsExhausted, SessionStore

logger = logging.getLogger(__name__)


def build_feedback(
    result, question: Question, explanation: str, used: int
) -> FeedbackPayload:
    groups = []
    for color_index, group in enumerate(result.post_mapping.groups):
        span = None
        if group.portion_verified:
            located = locate_portion(group.explanation_portion, explanation)
            if located:
                span = Span(start=located[0], end=located[1])
        groups.append(
            FeedbackGroup(
                color_index=color_index,
                portion=group.explanation_portion,
                explanation_span=span,
                code_lines=sorted(group.resolved_lines),
            )
        )
    return FeedbackPayload(
        groups=groups,
        bar=FeedbackBar(
            post_count=result.post_count,
            max_segments=len(question.snippet.substantive_indices()),
        ),
        level=result.level.value,
        warnings=list(result.warnings),
        attempt=AttemptInfo(used=used, max=question.max_attempts),
    )


def create_app(
    bank: dict[str, Question],
    backend: Backend,
    threshold: int = DEFAULT_THRESHOLD,
    rules: Sequence[PostRule] = DEFAULT_RULES,
    static_dir: str | Path | None = None,
    sessions_path: str | Path | None = None,
) -> FastAPI:
    sessions = SessionStore(sessions_path)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        sessions.save()

    app = FastAPI(title="explainseg feedback service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"http://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    ordered_ids = sorted(bank)

    def lookup(question_id: str) -> Question:
        # Reject anything outside the id alphabet before touching the bank.
        if not ID_PATTERN.match(question_id) or question_id not in bank:
            raise HTTPException(status_code=404, detail="unknown question")
        return bank[question_id]

    @app.get("/api/questions", response_model=list[QuestionSummary])
    def list_questions():
        return [
            QuestionSummary(
                id=q.id,
                title=q.title,
                language=q.language_tag,
                line_count=q.snippet.line_count,
            )
            for q in (bank[i] for i in ordered_ids)
        ]

    @app.get("/api/questions/{question_id}", response_model=QuestionDetail)
    def get_question(question_id: str):
        q = lookup(question_id)
        return QuestionDetail(
            id=q.id, title=q.title, code=q.code, max_attempts=q.max_attempts
        )

    @app.post("/api/questions/{question_id}/segment", response_model=FeedbackPayload)
    def segment(question_id: str, body: SegmentRequest):
        question = lookup(question_id)
        if not body.explanation.strip():
            raise HTTPException(status_code=400, detail="explanation is empty")
        try:
            used = sessions.reserve(body.session_id, question.id, question.max_attempts)
        except AttemptsExhausted as exc:
            raise HTTPException(
                status_code=429,
                detail=f"all {exc.maximum} attempts used for this question",
            ) from None
        response = StudentResponse(
            question_id=question.id, response_id=body.session_id, text=body.explanation
        )
        try:
            result = grade_response(question, response, backend, rules, threshold)
        except (BackendError, MappingParseError) as exc:
            # Failed submissions do not burn an attempt; detail stays server-side.
            sessions.release(body.session_id, question.id)
            logger.error("segmentation failed for %s: %s", question.id, exc)
            raise HTTPException(
                status_code=502,
                detail={
                    "message": "segmentation backend unavailable",
                    "retry_safe": isinstance(exc, (TransportError, Exhausted)),
                },
            ) from None
        return build_feedback(result, question, body.explanation, used)

    if static_dir:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
