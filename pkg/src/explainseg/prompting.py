"""Build the chat-message sequence and output-schema constraint for one request.

Everything here is a pure function of the question and the response text, so
equal inputs always produce byte-identical requests.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .corpus import MappingPair, Question
from .errors import EmptyResponse


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str


@dataclass(frozen=True)
class SegmentationRequest:
    messages: tuple[ChatMessage, ...]
    schema: dict
    question_id: str


SYSTEM_TEMPLATE = (
    "Task: Create a one-to-one mapping between each segment of a given "
    "explanation and the group of lines in the given code which that phrase "
    "is associated with. Not all of the description needs to be used. "
    "Not all of the code needs to be used. It is very important to only use "
    "the words in the user's provided explanation. One segment can map to "
    "multiple lines.\n"
    "Here is the code:\n"
)

USER_PREFIX = "Explanation: "

# Constraint sent to backends with structured-output support: a top-level
# "groups" array of {code, explanation_portion} string pairs, nothing else.
MAPPING_SCHEMA: dict = {
    "type": "object",
    "properties": {
        "groups": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "code": {"type": "string"},
                    "explanation_portion": {"type": "string"},
                },
                "required": ["code", "explanation_portion"],
                "additionalProperties": False,
            },
        }
    },
    "required": ["groups"],
    "additionalProperties": False,
}


def serialize_mapping(pairs: Iterable[MappingPair]) -> str:
    """Canonical mapping JSON: two-space indent, "code" before "explanation_portion"."""
    obj = {
        "groups": [
            {"code": p.code, "explanation_portion": p.explanation_portion}
            for p in pairs
        ]
    }
    return json.dumps(obj, indent=2)


def build_system_prompt(question: Question) -> str:
    return SYSTEM_TEMPLATE + question.code


def build_fewshot_messages(question: Question) -> list[ChatMessage]:
    """One user/assistant pair per authored exemplar, in authored order."""
    messages: list[ChatMessage] = []
    for example in question.few_shot:
        messages.append(ChatMessage(Role.USER, USER_PREFIX + example.explanation))
        messages.append(ChatMessage(Role.ASSISTANT, serialize_mapping(example.groups)))
    return messages


def build_request(question: Question, response_text: str) -> SegmentationRequest:
    if not response_text.strip():
        raise EmptyResponse("cannot build a request from an empty explanation")
    messages = [ChatMessage(Role.SYSTEM, build_system_prompt(question))]
    messages.extend(build_fewshot_messages(question))
    messages.append(ChatMessage(Role.USER, USER_PREFIX + response_text))
    return SegmentationRequest(
        messages=tuple(messages), schema=MAPPING_SCHEMA, question_id=question.id
    )


def response_text_of(request: SegmentationRequest) -> str:
    """Recover the student text carried by the final user turn."""
    final = request.messages[-1]
    content = final.content
    if content.startswith(USER_PREFIX):
        return content[len(USER_PREFIX):]
    return content
