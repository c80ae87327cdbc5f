"""EduKG-based question answering with citations.

Tier 1 retrieves paragraphs of the slide's main concepts and asks P2 for
verbatim answers. If that yields nothing, P3 picks one related concept from the
pooled RC candidates, and P2 runs again over that article's text in windows.
Every answer must be a whitespace-normalized substring of the context it cites;
anything else is discarded.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .embeddings import EmbeddingProvider
from .errors import EngineError, MalformedAnswerError
from .graph import EdgeKind, KnowledgeGraph, NodeKind
from .index import MAX_CHUNK, ScoredParagraph, chunk_paragraphs, is_indexed, top_k
from .ingestion.sources import ArticleSource
from .llm.parsing import _NoAnswer
from .llm import (
    ContextPassage, ExtractedAnswer, Gateway, NoAnswer, PromptP2Context, PromptP3Context, RcCandidate,
    parse_answer, parse_rc_choice, render_p2, render_p3,
)
from .text import contains_normalized, find_normalized, normalize_ws

log = logging.getLogger(__name__)

RC_CANDIDATE_CAP = 50


class Tier(str, Enum):
    MC_PARAGRAPH = "MC-paragraph"
    RC_ARTICLE = "RC-article"


class CitationError(EngineError):
    code = "citation_error"


@dataclass(frozen=True)
class AnswerWithCitation:
    answer_text: str
    source_article_title: str
    source_paragraph_index: int | None  # None marks a whole-article citation
    span_start: int
    span_end: int
    tier: Tier


@dataclass
class AnswerSet:
    question_id: str
    question: str
    answers: list[AnswerWithCitation] = field(default_factory=list)
    status: str = "no_answer"  # answered | no_answer | error
    error: str | None = None
    cause: EngineError | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.status == "no_answer" and self.answers:
            self.status = "answered"


@dataclass(frozen=True)
class RcArticle:
    rc_title: str
    article_text: str


@dataclass
class QaDeps:
    graph: KnowledgeGraph
    embedder: EmbeddingProvider
    source: ArticleSource
    gateway: Gateway
    k: int = 5
    floor: float = 0.15
    rc_cap: int = RC_CANDIDATE_CAP


def slide_mcs(graph: KnowledgeGraph, slide: str):
    return graph.neighbors(slide, EdgeKind.CONSISTS_OF)


def retrieve_contexts(
    question: str,
    slide: str,
    graph: KnowledgeGraph,
    provider: EmbeddingProvider,
    k: int = 5,
    floor: float = 0.15,
) -> list[ScoredParagraph]:
    scope = [mc.id for mc in slide_mcs(graph, slide) if is_indexed(graph, mc.id)]
    if not scope:
        return []
    return [p for p in top_k(question, k, scope, graph, provider) if p.score >= floor]


def extract_answers(
    question: str,
    contexts: Sequence[ContextPassage],
    gateway: Gateway,
) -> list[ExtractedAnswer] | _NoAnswer:
    """Run P2 and keep only answers grounded in the context they cite."""
    request = render_p2(PromptP2Context(question, tuple(contexts)), model_name=gateway.model_name,
                        temperature=gateway.temperature)
    by_label = {c.source_label: c.text for c in contexts}
    parsed = None
    for attempt in (1, 2):
        try:
            parsed = parse_answer(gateway.complete(request), list(by_label))
            break
        except MalformedAnswerError:
            if attempt == 2:
                raise
            log.warning("malformed extractive answer, retrying once")
    if parsed is NoAnswer:
        return NoAnswer
    grounded = []
    for ans in parsed:
        if contains_normalized(ans.answer_text, by_label[ans.source_label]):
            grounded.append(ExtractedAnswer(ans.source_label, normalize_ws(ans.answer_text)))
        else:
            log.warning("grounding violation: answer for [%s] is not a substring of its context: %r",
                        ans.source_label, ans.answer_text[:80])
    return grounded or NoAnswer


def rc_candidates(graph: KnowledgeGraph, slide: str, cap: int = RC_CANDIDATE_CAP) -> list:
    """RC nodes of the slide's MCs: link order within an MC, round-robin across MCs."""
    per_mc = [graph.neighbors(mc.id, EdgeKind.RELATED_TO) for mc in slide_mcs(graph, slide)]
    seen: dict[str, object] = {}
    depth = 0
    while len(seen) < cap and any(depth < len(rcs) for rcs in per_mc):
        for rcs in per_mc:
            if depth < len(rcs) and len(seen) < cap:
                seen.setdefault(str(rcs[depth]["article_title"]), rcs[depth])
        depth += 1
    return list(seen.values())


def fallback_rc(
    question: str,
    slide: str,
    graph: KnowledgeGraph,
    source: ArticleSource,
    gateway: Gateway,
    cap: int = RC_CANDIDATE_CAP,
) -> RcArticle | None:
    rcs = rc_candidates(graph, slide, cap)
    if not rcs:
        return None
    candidates = tuple(RcCandidate(str(n["article_title"]), str(n.get("first_sentence", ""))) for n in rcs)
    request = render_p3(PromptP3Context(question, candidates), model_name=gateway.model_name,
                        temperature=gateway.temperature)
    titles = [c.title for c in candidates]
    choice = None
    for attempt in (1, 2):
        try:
            choice = parse_rc_choice(gateway.complete(request), titles)
            break
        except MalformedAnswerError as exc:
            log.warning("related-concept selection attempt %d invalid: %s", attempt, exc)
    if choice is None:
        return None
    return RcArticle(choice, source.fetch(choice).text)


def locate_citation(answer_text: str, source_text: str) -> tuple[int, int]:
    span = find_normalized(answer_text, source_text)
    if span is None:
        raise CitationError(f"answer not found in its source: {answer_text[:80]!r}")
    return span


def article_windows(text: str, limit: int = MAX_CHUNK) -> list[str]:
    """Pack consecutive paragraphs into windows of at most ``limit`` characters."""
    windows: list[str] = []
    for chunk in chunk_paragraphs(text, max_len=limit):
        if windows and len(windows[-1]) + 2 + len(chunk) <= limit:
            windows[-1] = f"{windows[-1]}\n\n{chunk}"
        else:
            windows.append(chunk)
    return windows


def _labels(texts: Sequence[str]) -> list[ContextPassage]:
    return [ContextPassage(f"C{i}", t) for i, t in enumerate(texts, 1)]


def answer_question(question_id: str, question: str, slide: str, deps: QaDeps) -> AnswerSet:
    result = AnswerSet(question_id, question)
    try:
        paragraphs = retrieve_contexts(question, slide, deps.graph, deps.embedder, deps.k, deps.floor)
        if paragraphs:
            passages = _labels([p.text for p in paragraphs])
            extracted = extract_answers(question, passages, deps.gateway)
            if extracted is not NoAnswer:
                by_label = {c.source_label: p for c, p in zip(passages, paragraphs)}
                for ans in extracted:
                    para = by_label[ans.source_label]
                    start, end = locate_citation(ans.answer_text, para.text)
                    result.answers.append(AnswerWithCitation(
                        para.text[start:end], para.mc_title, para.paragraph_index, start, end, Tier.MC_PARAGRAPH))

        if not result.answers:
            rc = fallback_rc(question, slide, deps.graph, deps.source, deps.gateway, deps.rc_cap)
            if rc is not None:
                passages = _labels(article_windows(rc.article_text))
                extracted = extract_answers(question, passages, deps.gateway) if passages else NoAnswer
                if extracted is not NoAnswer:
                    for ans in extracted:
                        start, end = locate_citation(ans.answer_text, rc.article_text)
                        result.answers.append(AnswerWithCitation(
                            rc.article_text[start:end], rc.rc_title, None, start, end, Tier.RC_ARTICLE))
    except EngineError as exc:
        chain = []
        cur: BaseException | None = exc
        while cur is not None:
            chain.append(f"{type(cur).__name__}: {cur}")
            cur = cur.__cause__
        result.answers.clear()
        result.status = "error"
        result.error = " <- ".join(chain)
        result.cause = exc
        return result
    result.status = "answered" if result.answers else "no_answer"
    return result


def rc_titles_of_slide(graph: KnowledgeGraph, slide: str) -> set[str]:
    return {str(rc["article_title"]) for mc in slide_mcs(graph, slide)
            for rc in graph.neighbors(mc.id, EdgeKind.RELATED_TO)}


def mc_titles_of_slide(graph: KnowledgeGraph, slide: str) -> set[str]:
    return {str(mc["article_title"]) for mc in slide_mcs(graph, slide)
            if mc.kind is NodeKind.MAIN_CONCEPT and mc["article_title"]}
