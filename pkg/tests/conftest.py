import json
import sys
from pathlib import Path

import pytest

from edurag.embeddings import HashEmbedder
from edurag.graph import EdgeKind, KnowledgeGraph, NodeKind
from edurag.ingestion import FixtureCorpus, build_edukg, parse_slide_deck
from edurag.index import index_material
from edurag.llm import Gateway, RetryPolicy, ScriptedProvider

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
CORPUS_DIR = FIXTURES / "corpus"
DECK_PATH = FIXTURES / "decks" / "intro_ml.json"
TRANSCRIPT = FIXTURES / "transcripts" / "scenario.json"


@pytest.fixture(scope="session")
def corpus():
    return FixtureCorpus(CORPUS_DIR)


@pytest.fixture(scope="session")
def deck_bytes():
    return DECK_PATH.read_bytes()


@pytest.fixture
def deck(deck_bytes):
    return parse_slide_deck(deck_bytes)


@pytest.fixture
def embedder():
    return HashEmbedder()


@pytest.fixture
def edukg(deck, corpus, embedder):
    """Fixture deck built and indexed."""
    g = build_edukg(deck, corpus)
    lm = g.nodes(NodeKind.LEARNING_MATERIAL)[0]
    index_material(g, lm.id, corpus, embedder)
    return g


def no_sleep(_seconds):
    pass


def scripted_gateway(script=None):
    return Gateway(ScriptedProvider(script), RetryPolicy(), sleep=no_sleep)


@pytest.fixture
def small_graph():
    """LM -> 2 slides; slide 1 has MCs A and B; A relates to RC1..RC3."""
    g = KnowledgeGraph()
    ids = {}
    ids["lm"] = g.add_node(NodeKind.LEARNING_MATERIAL, {"title": "Deck"})
    ids["s1"] = g.add_node(NodeKind.SLIDE, {"slide_text": "Alpha and beta.", "slide_index": 1})
    ids["s2"] = g.add_node(NodeKind.SLIDE, {"slide_text": "Nothing here.", "slide_index": 2})
    ids["a"] = g.add_node(NodeKind.MAIN_CONCEPT, {"concept_name": "Alpha", "article_title": "Alpha"})
    ids["b"] = g.add_node(NodeKind.MAIN_CONCEPT, {"concept_name": "Beta", "article_title": "Beta"})
    for i in (1, 2, 3):
        ids[f"rc{i}"] = g.add_node(NodeKind.RELATED_CONCEPT, {"article_title": f"Related {i}"})
    g.add_edge(ids["lm"], EdgeKind.CONTAINS, ids["s1"])
    g.add_edge(ids["lm"], EdgeKind.CONTAINS, ids["s2"])
    g.add_edge(ids["s1"], EdgeKind.CONSISTS_OF, ids["a"])
    g.add_edge(ids["s1"], EdgeKind.CONSISTS_OF, ids["b"])
    for i in (1, 2, 3):
        g.add_edge(ids["a"], EdgeKind.RELATED_TO, ids[f"rc{i}"])
    g.ids = ids
    return g


def write_corpus(root: Path, articles, index=None) -> Path:
    """Write a throwaway fixture corpus. ``articles``: list of (title, text, links)."""
    (root / "articles").mkdir(parents=True, exist_ok=True)
    for i, (title, text, links) in enumerate(articles):
        doc = {"title": title, "id": f"T{i}", "text": text, "links": list(links)}
        (root / "articles" / f"a{i:04d}.json").write_text(json.dumps(doc), encoding="utf-8")
    (root / "search_index.json").write_text(json.dumps(index or {}), encoding="utf-8")
    return root


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.RESULTS.values():
            terminalreporter.write_line(line)
