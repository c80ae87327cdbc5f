"""deck-v1 slide-deck files: ``{"title": ..., "slides": [{"index": 1, "text": ...}, ...]}``."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import ParseError, ValidationError
from ..text import normalize_ws


@dataclass(frozen=True)
class Slide:
    index: int
    text: str


@dataclass(frozen=True)
class SlideDeck:
    title: str
    slides: tuple[Slide, ...]

    def __len__(self) -> int:
        return len(self.slides)

    def to_document(self) -> dict:
        return {"title": self.title, "slides": [{"index": s.index, "text": s.text} for s in self.slides]}


def parse_slide_deck(data: bytes, format: str = "deck-v1") -> SlideDeck:
    if format != "deck-v1":
        raise ValidationError(f"unsupported deck format {format!r}")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("deck is not valid UTF-8", offset=exc.start) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed deck: {exc.msg}", location=f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("deck must be an object", location="$")
    title = doc.get("title")
    if not isinstance(title, str) or not title.strip():
        raise ValidationError("deck title required")
    raw = doc.get("slides")
    if not isinstance(raw, list):
        raise ParseError("slides must be a list", location="$.slides")
    if not raw:
        raise ValidationError("deck has no slides")

    slides = []
    for pos, entry in enumerate(raw):
        where = f"$.slides[{pos}]"
        if not isinstance(entry, dict):
            raise ParseError("slide must be an object", location=where)
        index, body = entry.get("index"), entry.get("text")
        if isinstance(index, bool) or not isinstance(index, int):
            raise ParseError("slide index must be an integer", location=f"{where}.index")
        if not isinstance(body, str):
            raise ParseError("slide text must be a string", location=f"{where}.text")
        if not normalize_ws(body):
            raise ValidationError(f"slide {index} has empty text")
        slides.append(Slide(index, body))

    if [s.index for s in slides] != list(range(1, len(slides) + 1)):
        raise ValidationError("non-contiguous indices: slides must be numbered 1..n in order")
    return SlideDeck(title.strip(), tuple(slides))
