"""PKG-based question generation: PKG context -> P1 -> semantic dedup -> re-rank by slide similarity."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Sequence

from .embeddings import EmbeddingProvider, dot
from .errors import ContractError, EmptyGenerationError, GenerationFailedError, StateError
from .graph import EdgeKind, KnowledgeGraph, NodeKind
from .llm import Gateway, PromptP1Context, parse_question_list, render_p1

log = logging.getLogger(__name__)

DEDUP_THRESHOLD_REMOTE = 0.92
DEDUP_THRESHOLD_HASH = 0.999


@dataclass(frozen=True)
class QgContext:
    learner_id: str
    dnu_concept_id: str
    dnu_concept: str
    slide_id: str
    slide_text: str
    slide_concepts: tuple[str, ...]


@dataclass(frozen=True)
class GeneratedQuestion:
    question_id: str
    text: str
    rank_score: float
    dnu_concept: str | None = None
    created_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc), compare=False)


def retrieve_qg_context(graph: KnowledgeGraph, learner: str, concept: str, slide: str) -> QgContext:
    if graph.node(learner).kind is not NodeKind.LEARNER:
        raise ContractError(f"node {learner} is not a Learner")
    mc = graph.node(concept)
    s = graph.node(slide)
    if s.kind is not NodeKind.SLIDE:
        raise ContractError(f"node {slide} is not a Slide")
    if not graph.has_edge(slide, EdgeKind.CONSISTS_OF, concept):
        raise ContractError(f"concept {mc.get('concept_name')!r} is not on slide {s.get('slide_index')}")
    if not graph.has_edge(learner, EdgeKind.DNU, concept):
        raise StateError(f"learner {learner} has not marked {mc.get('concept_name')!r} as DNU")
    names = tuple(str(n["concept_name"]) for n in graph.neighbors(slide, EdgeKind.CONSISTS_OF))
    return QgContext(learner, concept, str(mc["concept_name"]), slide, str(s["slide_text"]), names)


def generate_questions(ctx: QgContext, gateway: Gateway, question_count: int = 5) -> list[str]:
    """Render P1 and parse; one retry on an empty generation."""
    request = render_p1(
        PromptP1Context(ctx.dnu_concept, ctx.slide_text, ctx.slide_concepts, question_count=question_count),
        model_name=gateway.model_name, temperature=gateway.temperature,
    )
    for attempt in (1, 2):
        try:
            return parse_question_list(gateway.complete(request), question_count)
        except EmptyGenerationError as exc:
            log.warning("question generation attempt %d produced nothing usable: %s", attempt, exc)
    raise GenerationFailedError(f"no questions could be generated for {ctx.dnu_concept!r}")


def dedup_semantic(questions: Sequence[str], provider: EmbeddingProvider, threshold: float) -> list[str]:
    if not 0 < threshold <= 1:
        raise ContractError("threshold must be in (0, 1]")
    vectors = provider.embed_batch(list(questions))
    kept: list[int] = []
    for i, v in enumerate(vectors):
        if all(questions[i] != questions[j] and dot(v, vectors[j]) < threshold for j in kept):
            kept.append(i)
    return [questions[i] for i in kept]


def rerank(
    questions: Sequence[str],
    slide_text: str,
    provider: EmbeddingProvider,
    dnu_concept: str | None = None,
    id_factory: Callable[[int], str] = lambda i: f"q{i + 1}",
) -> list[GeneratedQuestion]:
    if not questions:
        raise ContractError("nothing to rank")
    slide_vec = provider.embed_batch([slide_text])[0]
    q_vecs = provider.embed_batch(list(questions))
    scored = [(dot(v, slide_vec), i) for i, v in enumerate(q_vecs)]
    # stable sort keeps generation order among equal scores
    scored.sort(key=lambda t: -t[0])
    return [GeneratedQuestion(id_factory(i), questions[i], score, dnu_concept) for score, i in scored]


def recommend_questions(
    graph: KnowledgeGraph,
    learner: str,
    concept: str,
    slide: str,
    gateway: Gateway,
    provider: EmbeddingProvider,
    *,
    question_count: int = 5,
    threshold: float = DEDUP_THRESHOLD_HASH,
    id_factory: Callable[[int], str] = lambda i: f"q{i + 1}",
) -> list[GeneratedQuestion]:
    ctx = retrieve_qg_context(graph, learner, concept, slide)
    raw = generate_questions(ctx, gateway, question_count)
    unique = dedup_semantic(raw, provider, threshold)
    return rerank(unique, ctx.slide_text, provider, ctx.dnu_concept_id, id_factory)
