"""Graph-based paragraph index: WP nodes hang off their MC via HAS_PARAGRAPH.

Retrieval is exact: every in-scope paragraph is scored against the query and
the results sorted, so it can be checked against a plain full scan.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .embeddings import EmbeddingProvider, dot
from .errors import ContractError, EngineError
from .graph import EdgeKind, KnowledgeGraph, NodeKind
from .ingestion.build import reachable_mcs
from .ingestion.sources import ArticleSource
from .text import sentence_ends

log = logging.getLogger(__name__)

MIN_CHUNK = 40
MAX_CHUNK = 2000


@dataclass(frozen=True)
class ScoredParagraph:
    wp_node_id: str
    mc_id: str
    mc_title: str
    paragraph_index: int
    score: float
    text: str


@dataclass
class IndexSummary:
    created: int = 0
    indexed_mcs: list[str] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)  # MC title -> reason


def _split_long(chunk: str, limit: int) -> list[str]:
    pieces = []
    while len(chunk) > limit:
        cut = max((e for e in sentence_ends(chunk) if e <= limit), default=0)
        if cut == 0:
            cut = chunk.rfind(" ", 0, limit + 1)
            if cut <= 0:
                cut = limit
        pieces.append(chunk[:cut].strip())
        chunk = chunk[cut:].strip()
    if chunk:
        pieces.append(chunk)
    return pieces


def chunk_paragraphs(article_text: str, min_len: int = MIN_CHUNK, max_len: int = MAX_CHUNK) -> list[str]:
    blocks = [b.strip() for b in re.split(r"\n[ \t\r\f\v]*\n", article_text) if b.strip()]
    merged: list[str] = []
    carry = ""
    for block in blocks:
        cur = f"{carry}\n\n{block}" if carry else block
        if len(cur) < min_len:
            carry = cur
            continue
        merged.append(cur)
        carry = ""
    if carry:
        if merged:
            merged[-1] = f"{merged[-1]}\n\n{carry}"
        else:
            merged.append(carry)
    out: list[str] = []
    for chunk in merged:
        out.extend(_split_long(chunk, max_len))
    return out


def index_material(
    graph: KnowledgeGraph,
    lm: str,
    source: ArticleSource,
    provider: EmbeddingProvider,
    fanout: int = 4,
) -> IndexSummary:
    """Embed the paragraphs of every tagged MC reachable from ``lm``.

    Each MC's paragraph set is swapped in one step; a failing MC keeps its old
    paragraphs and is reported in ``failures``. Related concepts are not embedded.
    """
    mcs = [mc for mc in reachable_mcs(graph, lm) if mc.get("article_title")]
    summary = IndexSummary()

    def prepare(mc):
        text = source.fetch(str(mc["article_title"])).text
        chunks = chunk_paragraphs(text)
        vectors = provider.embed_batch(chunks)
        if len(vectors) != len(chunks):
            raise ContractError("provider returned a wrong number of embeddings")
        return chunks, vectors

    def attempt(mc):
        try:
            return prepare(mc), None
        except EngineError as exc:
            return None, exc

    with ThreadPoolExecutor(max_workers=max(1, fanout)) as pool:
        results = list(pool.map(attempt, mcs))

    for mc, (prepared, err) in zip(mcs, results):
        title = str(mc["article_title"])
        if err is not None:
            log.warning("indexing %r failed: %s", title, err)
            summary.failures[title] = str(err)
            continue
        chunks, vectors = prepared
        for old in graph.neighbors(mc.id, EdgeKind.HAS_PARAGRAPH):
            graph.remove_node(old.id)
        for i, (chunk, vec) in enumerate(zip(chunks, vectors)):
            wp = graph.add_node(NodeKind.WIKIPEDIA_PARAGRAPH, {"paragraph_text": chunk, "paragraph_index": i}, vec)
            graph.add_edge(mc.id, EdgeKind.HAS_PARAGRAPH, wp)
        graph.update_props(mc.id, indexed=1, paragraph_count=len(chunks), embedding_model=provider.name)
        summary.created += len(chunks)
        summary.indexed_mcs.append(mc.id)
    return summary


def is_indexed(graph: KnowledgeGraph, mc_id: str) -> bool:
    return bool(graph.node(mc_id).get("indexed"))


def top_k(
    query: str,
    k: int,
    scope: list[str],
    graph: KnowledgeGraph,
    provider: EmbeddingProvider,
) -> list[ScoredParagraph]:
    if k < 1:
        raise ContractError("k must be >= 1")
    if not scope:
        raise ContractError("scope must name at least one main concept")
    qvec = provider.embed_batch([query])[0]
    scored: list[ScoredParagraph] = []
    for mc_id in dict.fromkeys(scope):
        mc = graph.node(mc_id)
        if mc.kind is not NodeKind.MAIN_CONCEPT or not is_indexed(graph, mc_id):
            raise ContractError(f"main concept {mc_id} ({mc.get('concept_name')!r}) is not indexed")
        title = str(mc["article_title"])
        for wp in graph.neighbors(mc_id, EdgeKind.HAS_PARAGRAPH):
            scored.append(
                ScoredParagraph(wp.id, mc_id, title, int(wp["paragraph_index"]), dot(qvec, wp.embedding),
                                str(wp["paragraph_text"]))
            )
    scored.sort(key=lambda p: (-p.score, p.mc_title, p.paragraph_index))
    return scored[:k]
