"""Parsers for model output. They return a value or raise a classified error."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Sequence

from ..errors import EmptyGenerationError, MalformedAnswerError
from ..text import normalize_ws
from .prompts import NO_ANSWER, NONE

log = logging.getLogger(__name__)

_NUMBERED_RE = re.compile(r"^\s*(\d+)\s*[.)]\s*(.+?)\s*$")
_LABELED_RE = re.compile(r"^\s*\[([^\[\]]+)\]\s*(.*?)\s*$")


class _NoAnswer:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NoAnswer"

    def __bool__(self) -> bool:
        return False


NoAnswer = _NoAnswer()


@dataclass(frozen=True)
class ExtractedAnswer:
    source_label: str
    answer_text: str


def parse_question_list(text: str, expected_max: int) -> list[str]:
    questions = []
    for line in text.splitlines():
        m = _NUMBERED_RE.match(line)
        if not m:
            continue
        q = normalize_ws(m.group(2))
        if q.endswith("?"):
            questions.append(q)
    if not questions:
        raise EmptyGenerationError("no numbered questions found in model output")
    return questions[:expected_max]


def parse_answer(text: str, known_labels: Sequence[str]) -> list[ExtractedAnswer] | _NoAnswer:
    if text.strip() == NO_ANSWER:
        return NoAnswer
    known = set(known_labels)
    answers = []
    for line in text.splitlines():
        m = _LABELED_RE.match(line)
        if not m or not m.group(2):
            continue
        label = m.group(1).strip()
        if label not in known:
            log.warning("dropping answer with unknown label [%s]", label)
            continue
        answers.append(ExtractedAnswer(label, m.group(2)))
    if not answers:
        raise MalformedAnswerError(f"no valid labeled answer lines in model output: {text[:120]!r}")
    return answers


def parse_rc_choice(text: str, candidates: Sequence[str]) -> str | None:
    """Exact title from ``candidates``, ``None`` for the NONE sentinel.

    Raises MalformedAnswerError when the reply names something not offered.
    """
    reply = normalize_ws(text).strip("\"'` ")
    if reply not in candidates:
        trimmed = reply.rstrip(".").strip("\"'` ")
        if trimmed in candidates or trimmed == NONE:
            reply = trimmed
    if reply == NONE:
        return None
    if reply in candidates:
        return reply
    raise MalformedAnswerError(f"reply {reply[:80]!r} is not one of the offered titles")
