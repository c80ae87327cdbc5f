"""Typed property graph holding an EduKG and the per-learner PKG overlays.

One graph per learning material. Node ids are engine-assigned integers rendered
as strings; edges carry no properties and keep insertion order so traversals are
deterministic. Persistence is a single JSON snapshot with sorted keys.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Union

from .errors import NotFoundError, ParseError, SchemaError, ValidationError

log = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1

PropValue = Union[str, int, float]


class NodeKind(str, Enum):
    LEARNING_MATERIAL = "LearningMaterial"
    SLIDE = "Slide"
    MAIN_CONCEPT = "MainConcept"
    RELATED_CONCEPT = "RelatedConcept"
    LEARNER = "Learner"
    WIKIPEDIA_PARAGRAPH = "WikipediaParagraph"


class EdgeKind(str, Enum):
    CONTAINS = "CONTAINS"
    CONSISTS_OF = "CONSISTS_OF"
    RELATED_TO = "RELATED_TO"
    DNU = "DNU"
    HAS_PARAGRAPH = "HAS_PARAGRAPH"


EDGE_SCHEMA: dict[EdgeKind, tuple[NodeKind, NodeKind]] = {
    EdgeKind.CONTAINS: (NodeKind.LEARNING_MATERIAL, NodeKind.SLIDE),
    EdgeKind.CONSISTS_OF: (NodeKind.SLIDE, NodeKind.MAIN_CONCEPT),
    EdgeKind.RELATED_TO: (NodeKind.MAIN_CONCEPT, NodeKind.RELATED_CONCEPT),
    EdgeKind.DNU: (NodeKind.LEARNER, NodeKind.MAIN_CONCEPT),
    EdgeKind.HAS_PARAGRAPH: (NodeKind.MAIN_CONCEPT, NodeKind.WIKIPEDIA_PARAGRAPH),
}

REQUIRED_PROPS: dict[NodeKind, tuple[str, ...]] = {
    NodeKind.LEARNING_MATERIAL: ("title",),
    NodeKind.SLIDE: ("slide_text",),
    NodeKind.MAIN_CONCEPT: ("concept_name", "article_title"),
    NodeKind.RELATED_CONCEPT: ("article_title",),
    NodeKind.LEARNER: ("learner_name",),
    NodeKind.WIKIPEDIA_PARAGRAPH: ("paragraph_text", "paragraph_index"),
}

Edge = tuple[str, EdgeKind, str]


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    props: dict[str, PropValue] = field(default_factory=dict)
    embedding: tuple[float, ...] | None = None

    def __getitem__(self, key: str) -> PropValue:
        return self.props[key]

    def get(self, key: str, default=None):
        return self.props.get(key, default)


@dataclass
class PkgView:
    learner_id: str
    dnu_concepts: list[str]
    # MC id -> ids of the slides that consist of it, in insertion order
    containing_slides: dict[str, list[str]]


def _check_props(kind: NodeKind, props: Mapping[str, PropValue]) -> None:
    for key in REQUIRED_PROPS[kind]:
        if key not in props:
            raise ValidationError(f"{key} required")
    for key, value in props.items():
        if isinstance(value, bool) or not isinstance(value, (str, int, float)):
            raise ValidationError(f"prop {key!r} must be a string or number, got {type(value).__name__}")
    if kind is NodeKind.SLIDE and not str(props["slide_text"]).strip():
        raise ValidationError("slide_text required")
    if kind is NodeKind.WIKIPEDIA_PARAGRAPH:
        idx = props["paragraph_index"]
        if not isinstance(idx, int) or idx < 0:
            raise ValidationError("paragraph_index must be a non-negative integer")


class KnowledgeGraph:
    """Property graph with a fixed node/edge schema.

    Mutations need exclusive access; reads may run concurrently between them.
    """

    def __init__(self) -> None:
        self._nodes: dict[str, Node] = {}
        self._edges: dict[Edge, None] = {}
        self._out: dict[tuple[str, EdgeKind], list[str]] = {}
        self._in: dict[tuple[str, EdgeKind], list[str]] = {}
        self._next_id = 1

    # -- nodes -------------------------------------------------------------

    def add_node(
        self,
        kind: NodeKind,
        props: Mapping[str, PropValue],
        embedding: Iterable[float] | None = None,
    ) -> str:
        kind = NodeKind(kind)
        props = dict(props)
        _check_props(kind, props)
        node_id = str(self._next_id)
        self._next_id += 1
        vec = tuple(float(x) for x in embedding) if embedding is not None else None
        self._nodes[node_id] = Node(node_id, kind, props, vec)
        return node_id

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise NotFoundError(f"unknown node id {node_id!r}") from None

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._nodes

    def update_props(self, node_id: str, **changes: PropValue) -> None:
        node = self.node(node_id)
        props = {**node.props, **changes}
        _check_props(node.kind, props)
        self._nodes[node_id] = Node(node_id, node.kind, props, node.embedding)

    def remove_node(self, node_id: str) -> None:
        self.node(node_id)
        for edge in [e for e in self._edges if e[0] == node_id or e[2] == node_id]:
            self.remove_edge(*edge)
        del self._nodes[node_id]

    def nodes(self, kind: NodeKind | None = None) -> list[Node]:
        return [n for n in self._nodes.values() if kind is None or n.kind is kind]

    def find(self, kind: NodeKind, **props: PropValue) -> Node | None:
        """First node of ``kind`` whose props include all of ``props``."""
        for n in self._nodes.values():
            if n.kind is kind and all(n.props.get(k) == v for k, v in props.items()):
                return n
        return None

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    # -- edges -------------------------------------------------------------

    def add_edge(self, src: str, kind: EdgeKind, dst: str) -> None:
        kind = EdgeKind(kind)
        s, d = self.node(src), self.node(dst)
        want_src, want_dst = EDGE_SCHEMA[kind]
        if s.kind is not want_src or d.kind is not want_dst:
            raise SchemaError(
                f"{kind.value} must connect {want_src.value} -> {want_dst.value}, "
                f"got {s.kind.value} -> {d.kind.value}"
            )
        if src == dst:
            raise SchemaError("self-loops are not allowed")
        edge = (src, kind, dst)
        if edge in self._edges:
            return
        self._edges[edge] = None
        self._out.setdefault((src, kind), []).append(dst)
        self._in.setdefault((dst, kind), []).append(src)

    def remove_edge(self, src: str, kind: EdgeKind, dst: str) -> bool:
        edge = (src, EdgeKind(kind), dst)
        if edge not in self._edges:
            return False
        del self._edges[edge]
        self._out[(src, edge[1])].remove(dst)
        self._in[(dst, edge[1])].remove(src)
        return True

    def has_edge(self, src: str, kind: EdgeKind, dst: str) -> bool:
        return (src, EdgeKind(kind), dst) in self._edges

    def edges(self) -> list[Edge]:
        return list(self._edges)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def neighbors(self, node_id: str, kind: EdgeKind, direction: str = "out") -> list[Node]:
        self.node(node_id)
        if direction == "out":
            ids = self._out.get((node_id, EdgeKind(kind)), [])
        elif direction == "in":
            ids = self._in.get((node_id, EdgeKind(kind)), [])
        else:
            raise ValueError(f"direction must be 'out' or 'in', not {direction!r}")
        return [self._nodes[i] for i in ids]

    # -- PKG overlay -------------------------------------------------------

    def mark_dnu(self, learner: str, concept: str) -> None:
        if self.node(learner).kind is not NodeKind.LEARNER:
            raise SchemaError(f"node {learner} is not a Learner")
        c = self.node(concept)
        if c.kind is not NodeKind.MAIN_CONCEPT:
            raise SchemaError(f"only MainConcept nodes can be marked DNU, got {c.kind.value}")
        self.add_edge(learner, EdgeKind.DNU, concept)

    def unmark_dnu(self, learner: str, concept: str) -> bool:
        return self.remove_edge(learner, EdgeKind.DNU, concept)

    def pkg_view(self, learner: str) -> PkgView:
        if self.node(learner).kind is not NodeKind.LEARNER:
            raise NotFoundError(f"node {learner} is not a Learner")
        concepts = [n.id for n in self.neighbors(learner, EdgeKind.DNU)]
        slides: dict[str, list[str]] = {}
        for mc in concepts:
            containing = [s.id for s in self.neighbors(mc, EdgeKind.CONSISTS_OF, "in")]
            if containing:
                slides[mc] = containing
            else:
                log.info("DNU concept %s has no containing slide; omitted from slide map", mc)
        return PkgView(learner, concepts, slides)

    # -- integrity ---------------------------------------------------------

    def validate(self) -> None:
        """Raise SchemaError if any stored edge or node breaks the schema."""
        for node in self._nodes.values():
            try:
                _check_props(node.kind, node.props)
            except ValidationError as exc:
                raise SchemaError(f"node {node.id}: {exc}") from None
        for src, kind, dst in self._edges:
            if src not in self._nodes or dst not in self._nodes:
                raise SchemaError(f"dangling edge {src} -{kind.value}-> {dst}")
            want = EDGE_SCHEMA[kind]
            if (self._nodes[src].kind, self._nodes[dst].kind) != want or src == dst:
                raise SchemaError(f"edge {src} -{kind.value}-> {dst} breaks schema")

    # -- persistence -------------------------------------------------------

    def to_document(self) -> dict:
        nodes = []
        for n in sorted(self._nodes.values(), key=lambda n: int(n.id)):
            entry = {"id": n.id, "kind": n.kind.value, "props": n.props}
            if n.embedding is not None:
                entry["embedding"] = list(n.embedding)
            nodes.append(entry)
        return {
            "version": SNAPSHOT_VERSION,
            "next_id": self._next_id,
            "nodes": nodes,
            # insertion order matters: neighbors() replays it
            "edges": [[s, k.value, d] for s, k, d in self._edges],
        }

    def snapshot(self) -> bytes:
        doc = self.to_document()
        return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"), allow_nan=False).encode(
            "utf-8"
        )

    @classmethod
    def load(cls, data: bytes) -> "KnowledgeGraph":
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("snapshot is not valid UTF-8", offset=exc.start) from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            offset = len(text[: exc.pos].encode("utf-8"))
            raise ParseError(f"corrupted snapshot: {exc.msg}", offset=offset) from None
        return cls.from_document(doc)

    @classmethod
    def from_document(cls, doc: object) -> "KnowledgeGraph":
        if not isinstance(doc, dict) or doc.get("version") != SNAPSHOT_VERSION:
            raise ParseError(f"unsupported snapshot document (expected version {SNAPSHOT_VERSION})")
        g = cls()
        try:
            max_id = 0
            for entry in doc["nodes"]:
                kind = NodeKind(entry["kind"])
                props = dict(entry["props"])
                _check_props(kind, props)
                emb = entry.get("embedding")
                node_id = str(entry["id"])
                if node_id in g._nodes:
                    raise ParseError(f"duplicate node id {node_id}")
                g._nodes[node_id] = Node(node_id, kind, props, tuple(emb) if emb is not None else None)
                max_id = max(max_id, int(node_id))
            for src, kind, dst in doc["edges"]:
                g.add_edge(src, EdgeKind(kind), dst)
            g._next_id = max(int(doc.get("next_id", max_id + 1)), max_id + 1)
        except (KeyError, TypeError, ValueError, ValidationError, SchemaError, NotFoundError) as exc:
            raise ParseError(f"invalid snapshot content: {exc}") from None
        return g

    def __iter__(self) -> Iterator[Node]:
        return iter(self._nodes.values())
