"""Service wiring: materials on disk, learner PKGs, question registry, QA.

One snapshot per learning material under ``<data_dir>/materials``; generated
questions live in ``<data_dir>/questions.json`` so answers survive restarts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote

from ..embeddings import EmbeddingProvider, HashEmbedder, RemoteEmbedder
from ..errors import ContractError, EngineError, InFlightError, NotFoundError, TransportError
from ..graph import EdgeKind, KnowledgeGraph, NodeKind
from ..index import index_material
from ..ingestion import FixtureCorpus, IngestConfig, WikipediaSource, build_edukg, parse_slide_deck
from ..ingestion.build import material_node, slide_node
from ..ingestion.sources import ArticleSource
from ..llm import Gateway, RemoteChatProvider, RetryPolicy, ScriptedProvider
from ..qa import AnswerSet, QaDeps, answer_question
from ..qgen import dedup_semantic, generate_questions, rerank, retrieve_qg_context
from .config import ServiceConfig

log = logging.getLogger(__name__)

FULL_ARTICLE = "full"


class IngestFailed(EngineError):
    code = "article_source_failure"

    def __init__(self, message: str, details: dict):
        super().__init__(message)
        self.details = details


class RWLock:
    """Many readers or one writer."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


@dataclass
class Material:
    material_id: str
    graph: KnowledgeGraph
    lock: RWLock = field(default_factory=RWLock)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def build_source(config: ServiceConfig) -> ArticleSource:
    if config.source == "fixture":
        return FixtureCorpus(config.corpus_dir)
    return WikipediaSource(config.wiki_base_url, timeout=config.timeout)


def build_embedder(config: ServiceConfig) -> EmbeddingProvider:
    if config.embedding_provider == "hash":
        return HashEmbedder()
    return RemoteEmbedder(config.embedding_base_url, config.embedding_model, config.embedding_dimension,
                          timeout=config.timeout)


def build_gateway(config: ServiceConfig) -> Gateway:
    if config.chat_provider == "scripted":
        provider = ScriptedProvider.from_file(config.transcript)
    else:
        provider = RemoteChatProvider(config.chat_base_url)
    return Gateway(provider, RetryPolicy(timeout=config.timeout), config.max_concurrency, config.chat_model,
                   config.temperature)


def material_id_for(deck) -> str:
    canonical = json.dumps(deck.to_document(), sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(canonical).hexdigest()[:16]


def citation_url(material_id: str, title: str, paragraph: int | None, start: int, end: int) -> str:
    para = FULL_ARTICLE if paragraph is None else str(paragraph)
    return f"/materials/{material_id}/sources/{quote(title, safe='')}/{para}#h={start}-{end}"


class Engine:
    def __init__(
        self,
        config: ServiceConfig,
        *,
        source: ArticleSource | None = None,
        embedder: EmbeddingProvider | None = None,
        gateway: Gateway | None = None,
    ):
        self.config = config
        self.data_dir = config.ensure_data_dir()
        (self.data_dir / "materials").mkdir(exist_ok=True)
        self.source = source if source is not None else build_source(config)
        self.embedder = embedder if embedder is not None else build_embedder(config)
        self.gateway = gateway if gateway is not None else build_gateway(config)
        self._materials: dict[str, Material] = {}
        self._registry_lock = threading.Lock()
        self._ingest_lock = threading.Lock()
        self._in_flight: set[tuple[str, str, str]] = set()
        self._questions, self._next_question = self._load_registry()

    # -- persistence -------------------------------------------------------

    def _snapshot_path(self, material_id: str) -> Path:
        return self.data_dir / "materials" / f"{material_id}.json"

    def _registry_path(self) -> Path:
        return self.data_dir / "questions.json"

    def _load_registry(self) -> tuple[dict[str, dict], int]:
        path = self._registry_path()
        if not path.exists():
            return {}, 1
        doc = json.loads(path.read_text(encoding="utf-8"))
        return doc["questions"], doc["next"]

    def _save_registry(self) -> None:
        doc = {"next": self._next_question, "questions": self._questions}
        _atomic_write(self._registry_path(), json.dumps(doc, sort_keys=True, indent=1).encode("utf-8"))

    def _save(self, material: Material) -> None:
        _atomic_write(self._snapshot_path(material.material_id), material.graph.snapshot())

    def material(self, material_id: str) -> Material:
        m = self._materials.get(material_id)
        if m is not None:
            return m
        path = self._snapshot_path(material_id)
        if not material_id.isalnum() or not path.exists():
            raise NotFoundError(f"unknown material {material_id!r}")
        with self._ingest_lock:
            m = self._materials.get(material_id)
            if m is None:
                m = Material(material_id, KnowledgeGraph.load(path.read_bytes()))
                self._materials[material_id] = m
        return m

    def snapshot_bytes(self, material_id: str) -> bytes:
        m = self.material(material_id)
        with m.lock.read():
            return m.graph.snapshot()

    # -- ingestion ---------------------------------------------------------

    def ingest(self, deck_bytes: bytes) -> dict:
        deck = parse_slide_deck(deck_bytes)
        mid = material_id_for(deck)
        with self._ingest_lock:
            existing = self._materials.get(mid)
            if existing is None and self._snapshot_path(mid).exists():
                existing = Material(mid, KnowledgeGraph.load(self._snapshot_path(mid).read_bytes()))
                self._materials[mid] = existing
            if existing is not None:
                with existing.lock.read():
                    return self._counts(existing, {})
            cfg = IngestConfig(self.config.max_concepts, self.config.max_rcs, self.config.fanout)
            try:
                graph = build_edukg(deck, self.source, cfg)
            except TransportError as exc:
                raise IngestFailed(f"article source failed while building the EduKG: {exc}",
                                   {"stage": "build", "title": deck.title, "slide_count": len(deck)}) from exc
            summary = index_material(graph, material_node(graph).id, self.source, self.embedder, self.config.fanout)
            material = Material(mid, graph)
            self._save(material)
            self._materials[mid] = material
            return self._counts(material, summary.failures)

    def _counts(self, m: Material, failures: dict) -> dict:
        g = m.graph
        return {
            "material_id": m.material_id,
            "title": material_node(g)["title"],
            "slide_count": len(g.nodes(NodeKind.SLIDE)),
            "mc_count": len(g.nodes(NodeKind.MAIN_CONCEPT)),
            "rc_count": len(g.nodes(NodeKind.RELATED_CONCEPT)),
            "wp_count": len(g.nodes(NodeKind.WIKIPEDIA_PARAGRAPH)),
            "index_failures": failures,
        }

    # -- reads -------------------------------------------------------------

    def _slide(self, m: Material, index: int):
        s = slide_node(m.graph, index)
        if s is None:
            raise NotFoundError(f"material {m.material_id} has no slide {index}")
        return s

    @staticmethod
    def _concept_doc(mc) -> dict:
        return {"id": mc.id, "name": mc["concept_name"], "article_title": mc["article_title"]}

    def concepts(self, material_id: str, slide_index: int) -> dict:
        m = self.material(material_id)
        with m.lock.read():
            s = self._slide(m, slide_index)
            mcs = m.graph.neighbors(s.id, EdgeKind.CONSISTS_OF)
            return {"material_id": material_id, "slide_index": slide_index, "slide_text": s["slide_text"],
                    "main_concepts": [self._concept_doc(mc) for mc in mcs]}

    def _learner(self, m: Material, learner_id: str):
        return m.graph.find(NodeKind.LEARNER, learner_name=learner_id)

    def pkg(self, learner_id: str, material_id: str) -> dict:
        m = self.material(material_id)
        with m.lock.read():
            learner = self._learner(m, learner_id)
            groups: dict[str, list] = {}
            if learner is not None:
                view = m.graph.pkg_view(learner.id)
                for mc_id in view.dnu_concepts:
                    for sid in view.containing_slides.get(mc_id, []):
                        groups.setdefault(sid, []).append(self._concept_doc(m.graph.node(mc_id)))
            slides = sorted(
                ({"slide_index": m.graph.node(sid)["slide_index"], "concepts": cs} for sid, cs in groups.items()),
                key=lambda g: g["slide_index"],
            )
            return {"learner_id": learner_id, "material_id": material_id, "slides": slides}

    def source_text(self, material_id: str, article: str, paragraph: str) -> dict:
        m = self.material(material_id)
        with m.lock.read():
            g = m.graph
            if paragraph == FULL_ARTICLE:
                known = {str(n["article_title"]) for n in g.nodes(NodeKind.RELATED_CONCEPT)}
                known |= {str(n["article_title"]) for n in g.nodes(NodeKind.MAIN_CONCEPT) if n["article_title"]}
                if article not in known:
                    raise NotFoundError(f"article {article!r} is not part of material {material_id}")
                text = None
            else:
                if not paragraph.isdigit():
                    raise NotFoundError(f"bad paragraph reference {paragraph!r}")
                mc = g.find(NodeKind.MAIN_CONCEPT, article_title=article)
                if mc is None:
                    raise NotFoundError(f"article {article!r} is not indexed in material {material_id}")
                wps = [w for w in g.neighbors(mc.id, EdgeKind.HAS_PARAGRAPH) if w["paragraph_index"] == int(paragraph)]
                if not wps:
                    raise NotFoundError(f"article {article!r} has no paragraph {paragraph}")
                text = str(wps[0]["paragraph_text"])
        if text is None:
            text = self.source.fetch(article).text
        return {"material_id": material_id, "article_title": article, "paragraph": paragraph, "text": text}

    # -- learner actions ---------------------------------------------------

    def mark_dnu(self, learner_id: str, material_id: str, slide_index: int, concept_id: str) -> dict:
        m = self.material(material_id)
        key = (learner_id, material_id, concept_id)
        with self._registry_lock:
            if key in self._in_flight:
                raise InFlightError(f"question generation already running for {learner_id}/{concept_id}")
            self._in_flight.add(key)
        try:
            with m.lock.write():
                s = self._slide(m, slide_index)
                if concept_id not in m.graph or not m.graph.has_edge(s.id, EdgeKind.CONSISTS_OF, concept_id):
                    raise ContractError(f"concept {concept_id!r} is not on slide {slide_index}")
                learner = self._learner(m, learner_id)
                lid = learner.id if learner else m.graph.add_node(NodeKind.LEARNER, {"learner_name": learner_id})
                m.graph.mark_dnu(lid, concept_id)
                ctx = retrieve_qg_context(m.graph, lid, concept_id, s.id)
                self._save(m)
            raw = generate_questions(ctx, self.gateway, self.config.question_count)
            unique = dedup_semantic(raw, self.embedder, self.config.effective_dedup_threshold)
            with self._registry_lock:
                base = self._next_question
                self._next_question += len(unique)
                ranked = rerank(unique, ctx.slide_text, self.embedder, concept_id,
                                id_factory=lambda i: f"q{base + i}")
                for q in ranked:
                    self._questions[q.question_id] = {
                        "material_id": material_id, "slide_index": slide_index, "learner_id": learner_id,
                        "concept_id": concept_id, "text": q.text, "rank_score": q.rank_score,
                    }
                self._save_registry()
        finally:
            with self._registry_lock:
                self._in_flight.discard(key)
        return {
            "learner_id": learner_id,
            "material_id": material_id,
            "slide_index": slide_index,
            "concept_id": concept_id,
            "concept_name": ctx.dnu_concept,
            "questions": [{"question_id": q.question_id, "text": q.text, "rank_score": q.rank_score}
                          for q in ranked],
        }

    def question(self, question_id: str) -> dict:
        try:
            return self._questions[question_id]
        except KeyError:
            raise NotFoundError(f"unknown question {question_id!r}") from None

    def _answer(self, question_id: str, text: str, material_id: str, slide_index: int) -> AnswerSet:
        m = self.material(material_id)
        with m.lock.read():
            s = self._slide(m, slide_index)
            deps = QaDeps(m.graph, self.embedder, self.source, self.gateway, self.config.retrieval_k,
                          self.config.similarity_floor, self.config.rc_candidate_cap)
            return answer_question(question_id, text, s.id, deps)

    def answer(self, question_id: str) -> AnswerSet:
        q = self.question(question_id)
        return self._answer(question_id, q["text"], q["material_id"], q["slide_index"])

    def ask(self, material_id: str, slide_index: int, question: str) -> AnswerSet:
        qid = "adhoc-" + hashlib.sha256(f"{material_id}|{slide_index}|{question}".encode()).hexdigest()[:12]
        return self._answer(qid, question, material_id, slide_index)

    def answer_document(self, material_id: str, answers: AnswerSet) -> dict:
        return {
            "question_id": answers.question_id,
            "question": answers.question,
            "status": answers.status,
            "error": answers.error,
            "answers": [
                {
                    "answer_text": a.answer_text,
                    "source_article_title": a.source_article_title,
                    "source_paragraph_index": a.source_paragraph_index,
                    "span_start": a.span_start,
                    "span_end": a.span_end,
                    "tier": a.tier.value,
                    "citation_url": citation_url(material_id, a.source_article_title, a.source_paragraph_index,
                                                 a.span_start, a.span_end),
                }
                for a in answers.answers
            ],
        }
