"""explainseg: classify code explanations as relational or multi-structural.

A completion backend maps segments of a student's explanation onto the lines
of code they describe; the number of surviving segments, compared against a
threshold, decides the comprehension level.
"""

from .backends import BackendConfig, BackendKind, make_backend
from .corpus import (
    HumanLabel,
    Level,
    Question,
    StudentResponse,
    load_question,
    load_question_bank,
    load_responses,
)
from .pipeline import (
    DEFAULT_RULES,
    ClassificationResult,
    classify,
    grade_many,
    grade_response,
)

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "BackendKind",
    "ClassificationResult",
    "DEFAULT_RULES",
    "HumanLabel",
    "Level",
    "Question",
    "StudentResponse",
    "classify",
    "grade_many",
    "grade_response",
    "load_question",
    "load_question_bank",
    "load_responses",
    "make_backend",
]
