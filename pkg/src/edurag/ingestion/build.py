"""EduKG construction: slides -> main concepts -> Wikipedia tags -> related concepts."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from ..errors import ContractError, EngineError
from ..graph import EdgeKind, KnowledgeGraph, NodeKind
from ..text import first_sentence, normalize_ws
from .deck import SlideDeck
from .keyphrase import rank_keyphrases
from .sources import ArticleRef, ArticleSource, to_ref

log = logging.getLogger(__name__)


@dataclass
class IngestConfig:
    max_concepts: int = 10
    max_rcs: int = 100
    fanout: int = 4


def tag_wikipedia(concept: str, source: ArticleSource) -> ArticleRef | None:
    """Pick the hit whose title equals the phrase (case-insensitively), else the top hit."""
    concept = normalize_ws(concept)
    if not concept:
        raise ContractError("concept must be non-empty")
    hits = source.search(concept)
    if not hits:
        return None
    for hit in hits:
        if hit.title.casefold() == concept.casefold():
            return hit
    return hits[0]


def expand_related_concepts(
    mc: ArticleRef,
    source: ArticleSource,
    max_rcs: int = 100,
    exclude: Iterable[str] = (),
) -> list[ArticleRef]:
    """Articles linked from ``mc``, in link order, skipping unfetchable links."""
    skip = {t.casefold() for t in exclude} | {mc.title.casefold()}
    out: list[ArticleRef] = []
    for title in mc.link_titles:
        if len(out) >= max_rcs:
            break
        if title.casefold() in skip:
            continue
        skip.add(title.casefold())
        try:
            article = source.fetch(title)
        except EngineError as exc:
            log.warning("skipping related concept %r of %r: %s", title, mc.title, exc)
            continue
        if article.title.casefold() in skip - {title.casefold()}:
            continue  # redirect onto something already present
        skip.add(article.title.casefold())
        out.append(to_ref(article))
    return out


def build_edukg(deck: SlideDeck, source: ArticleSource, config: IngestConfig | None = None) -> KnowledgeGraph:
    config = config or IngestConfig()
    g = KnowledgeGraph()
    lm = g.add_node(NodeKind.LEARNING_MATERIAL, {"title": deck.title})

    tags: dict[str, ArticleRef | None] = {}
    mc_by_key: dict[str, str] = {}
    refs_by_mc: dict[str, ArticleRef] = {}
    untagged = 0

    for slide in deck.slides:
        sid = g.add_node(NodeKind.SLIDE, {"slide_text": slide.text, "slide_index": slide.index})
        g.add_edge(lm, EdgeKind.CONTAINS, sid)
        for kp in rank_keyphrases(slide.text)[: config.max_concepts]:
            if kp.phrase not in tags:
                tags[kp.phrase] = tag_wikipedia(kp.phrase, source)
            ref = tags[kp.phrase]
            key = "article:" + ref.title.casefold() if ref else "phrase:" + kp.phrase
            mc = mc_by_key.get(key)
            if mc is None:
                props = {"concept_name": kp.surface, "keyphrase": kp.phrase, "article_title": ""}
                if ref:
                    props.update(article_title=ref.title, article_id=ref.article_id)
                else:
                    untagged += 1
                mc = g.add_node(NodeKind.MAIN_CONCEPT, props)
                mc_by_key[key] = mc
                if ref:
                    refs_by_mc[mc] = ref
            g.add_edge(sid, EdgeKind.CONSISTS_OF, mc)
    if untagged:
        log.info("%d main concepts have no article tag", untagged)

    def exclusions(mc: str) -> set[str]:
        titles = set()
        for slide in g.neighbors(mc, EdgeKind.CONSISTS_OF, "in"):
            for other in g.neighbors(slide.id, EdgeKind.CONSISTS_OF):
                if other["article_title"]:
                    titles.add(str(other["article_title"]))
        return titles

    mcs = list(refs_by_mc)
    with ThreadPoolExecutor(max_workers=max(1, config.fanout)) as pool:
        expanded = list(
            pool.map(lambda mc: expand_related_concepts(refs_by_mc[mc], source, config.max_rcs, exclusions(mc)), mcs)
        )

    rc_by_title: dict[str, str] = {}
    for mc, rcs in zip(mcs, expanded):
        for ref in rcs:
            rc = rc_by_title.get(ref.title.casefold())
            if rc is None:
                rc = g.add_node(
                    NodeKind.RELATED_CONCEPT,
                    {
                        "article_title": ref.title,
                        "article_id": ref.article_id,
                        "first_sentence": first_sentence(ref.summary_text),
                    },
                )
                rc_by_title[ref.title.casefold()] = rc
            g.add_edge(mc, EdgeKind.RELATED_TO, rc)
    return g


def slide_node(graph: KnowledgeGraph, index: int):
    for n in graph.nodes(NodeKind.SLIDE):
        if n.get("slide_index") == index:
            return n
    return None


def material_node(graph: KnowledgeGraph):
    nodes = graph.nodes(NodeKind.LEARNING_MATERIAL)
    return nodes[0] if nodes else None


def reachable_mcs(graph: KnowledgeGraph, lm: str) -> list:
    seen: dict[str, object] = {}
    for slide in graph.neighbors(lm, EdgeKind.CONTAINS):
        for mc in graph.neighbors(slide.id, EdgeKind.CONSISTS_OF):
            seen.setdefault(mc.id, mc)
    return list(seen.values())
