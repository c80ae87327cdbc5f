"""Small text helpers: tokenization, stop words, whitespace normalization."""

from __future__ import annotations

import re
from typing import Iterator, NamedTuple

STOP_WORDS = frozenset(
    """
    a about above after again against all also am an and any are aren't as at
    be because been before being below between both but by can cannot could
    couldn't did didn't do does doesn't doing don't down during each either
    etc few for from further had hadn't has hasn't have haven't having he her
    here hers herself him himself his how however i if in into is isn't it its
    itself just let may me might more most much must my myself no nor not now
    of off often on once one only or other others our ours ourselves out over
    own per same shall she should so some such than that the their theirs them
    themselves then there these they this those though through thus to too
    under until up upon us use used uses using very via was wasn't we were
    weren't what when where whether which while who whom whose why will with
    within without would you your yours yourself yourselves
    """.split()
)

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")
_WS_RE = re.compile(r"\s+")
_SENTENCE_END_RE = re.compile(r"(?<=[.!?])[\"')\]]*\s+")


class Token(NamedTuple):
    text: str  # lowercased
    start: int
    end: int


def tokens(text: str) -> Iterator[Token]:
    """Alphanumeric runs, lowercased, with character offsets into ``text``."""
    for m in _TOKEN_RE.finditer(text):
        yield Token(m.group(0).lower(), m.start(), m.end())


def is_stop(token: str) -> bool:
    return token in STOP_WORDS or len(token) < 2 or not any(c.isalpha() for c in token)


def normalize_ws(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def sentence_ends(text: str) -> list[int]:
    """Offsets just past each sentence terminator (before the following whitespace)."""
    return [m.start() for m in _SENTENCE_END_RE.finditer(text)]


def first_sentence(text: str) -> str:
    text = text.strip()
    ends = sentence_ends(text)
    return normalize_ws(text[: ends[0]] if ends else text)


def find_normalized(needle: str, haystack: str) -> tuple[int, int] | None:
    """Locate ``needle`` in ``haystack`` modulo whitespace runs.

    Both sides are compared after collapsing whitespace; the returned span is in
    original ``haystack`` character offsets, trimmed to non-whitespace ends.
    """
    target = normalize_ws(needle)
    if not target:
        return None
    # normalized haystack plus a map from normalized index -> original index
    norm_chars: list[str] = []
    index_map: list[int] = []
    prev_space = True
    for i, ch in enumerate(haystack):
        if ch.isspace():
            if not prev_space:
                norm_chars.append(" ")
                index_map.append(i)
            prev_space = True
        else:
            norm_chars.append(ch)
            index_map.append(i)
            prev_space = False
    norm = "".join(norm_chars)
    pos = norm.find(target)
    if pos < 0:
        return None
    start = index_map[pos]
    end = index_map[pos + len(target) - 1] + 1
    return start, end


def contains_normalized(needle: str, haystack: str) -> bool:
    target = normalize_ws(needle)
    return bool(target) and target in normalize_ws(haystack)
