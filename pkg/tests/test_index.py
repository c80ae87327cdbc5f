import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS_DIR, write_corpus
from edurag.embeddings import HashEmbedder, cosine, dot, fnv1a_64
from edurag.errors import ContractError, TransportError
from edurag.graph import EdgeKind, NodeKind
from edurag.index import chunk_paragraphs, index_material, top_k
from edurag.ingestion import FixtureCorpus, build_edukg, parse_slide_deck
from oracles import brute_force_top_k, reference_embed, reference_fnv1a_64, retrieval_case

# -- embeddings -------------------------------------------------------------

@pytest.mark.parametrize("data, expected", [
    (b"", 0xCBF29CE484222325),
    (b"a", 0xAF63DC4C8601EC8C),
    (b"foobar", 0x85944171F73967E8),
])
def test_fnv1a_published_vectors(data, expected):
    assert fnv1a_64(data) == expected


@pytest.mark.parametrize("a, b, expected", [
    ([1, 0], [1, 0], 1.0),
    ([1, 0], [0, 1], 0.0),
    ([1, 1], [1, 0], 0.70710678),
])
def test_cosine_examples(a, b, expected):
    assert cosine(a, b) == pytest.approx(expected, abs=1e-8)


def test_dimension_mismatch():
    with pytest.raises(ContractError):
        cosine([1, 0], [1, 0, 0])
    with pytest.raises(ContractError):
        dot([1], [1, 2])


def test_stop_word_text_maps_to_first_basis_vector():
    e = HashEmbedder()
    assert e.embed("the of and") == e.embed("") == (1.0,) + (0.0,) * 255


@given(st.text(max_size=80))
def test_hash_embedder_matches_reference_and_is_unit(text):
    vec = HashEmbedder().embed(text)
    assert len(vec) == 256
    assert math.sqrt(sum(x * x for x in vec)) == pytest.approx(1.0, abs=1e-6)
    assert vec == pytest.approx(reference_embed(text), abs=1e-12)


@given(st.text(alphabet="abcxyz019", min_size=1, max_size=12))
def test_fnv_matches_reference(token):
    assert fnv1a_64(token.encode()) == reference_fnv1a_64(token)


# -- chunking ---------------------------------------------------------------

P = "This paragraph is comfortably longer than forty characters."


def test_chunk_clean_split():
    assert chunk_paragraphs(f"{P}\n\n{P} Two.\n\n{P} Three.") == [P, f"{P} Two.", f"{P} Three."]


def test_chunk_empty():
    assert chunk_paragraphs("") == []
    assert chunk_paragraphs("  \n\n ") == []


def test_chunk_merges_short_into_following():
    assert chunk_paragraphs(f"Heading\n\n{P}") == [f"Heading\n\n{P}"]
    assert chunk_paragraphs(f"{P}\n\nShort tail") == [f"{P}\n\nShort tail"]


def test_chunk_splits_long_at_sentence_boundary():
    sentence = "Sentences are split here. "
    text = sentence * 100
    chunks = chunk_paragraphs(text)
    assert all(len(c) <= 2000 for c in chunks)
    assert len(chunks) == 2
    assert all(c.endswith(".") for c in chunks)


def test_chunk_long_without_boundaries():
    chunks = chunk_paragraphs("x" * 4500)
    assert [len(c) for c in chunks] == [2000, 2000, 500]


def test_fixture_artificial_intelligence_chunks(corpus):
    # hand count: four blank-line separated paragraphs, all longer than 40 characters
    assert len(chunk_paragraphs(corpus.fetch("Artificial intelligence").text)) == 4


@given(st.text(alphabet=st.sampled_from("ab. \n\t?!"), max_size=5000))
def test_chunking_preserves_non_whitespace(text):
    chunks = chunk_paragraphs(text)
    strip = lambda s: Counter(c for c in s if not c.isspace())  # noqa: E731
    assert strip("".join(chunks)) == strip(text)
    assert all(c == c.strip() and c for c in chunks)
    assert "".join("".join(chunks).split()) == "".join(text.split())


# -- indexing ---------------------------------------------------------------

def paragraphs(n, tag):
    return "\n\n".join(f"Paragraph {i} about {tag} has enough characters to stand alone." for i in range(n))


def two_mc_material(tmp_path, alpha_paras=5, beta_paras=3):
    root = write_corpus(tmp_path, [
        ("Alpha", paragraphs(alpha_paras, "alpha"), ["Gamma"]),
        ("Beta", paragraphs(beta_paras, "beta"), []),
        ("Gamma", "Gamma is related and is not embedded at all.", []),
    ])
    deck = parse_slide_deck(b'{"title": "d", "slides": [{"index": 1, "text": "Alpha, beta."}]}')
    src = FixtureCorpus(root)
    g = build_edukg(deck, src)
    return g, g.nodes(NodeKind.LEARNING_MATERIAL)[0].id, src


def wp_count(g):
    return len(g.nodes(NodeKind.WIKIPEDIA_PARAGRAPH))


def test_index_counts(tmp_path, embedder):
    g, lm, src = two_mc_material(tmp_path)
    summary = index_material(g, lm, src, embedder)
    assert summary.created == 8
    assert wp_count(g) == 8
    gamma = [n for n in g.nodes(NodeKind.RELATED_CONCEPT) if n["article_title"] == "Gamma"]
    assert gamma and g.neighbors(gamma[0].id, EdgeKind.HAS_PARAGRAPH) == []
    for wp in g.nodes(NodeKind.WIKIPEDIA_PARAGRAPH):
        assert math.sqrt(sum(x * x for x in wp.embedding)) == pytest.approx(1.0, abs=1e-6)


def test_index_zero_mcs(embedder):
    deck = parse_slide_deck(b'{"title": "d", "slides": [{"index": 1, "text": "the of and"}]}')
    g = build_edukg(deck, FixtureCorpus(CORPUS_DIR))
    assert index_material(g, g.nodes(NodeKind.LEARNING_MATERIAL)[0].id, FixtureCorpus(CORPUS_DIR), embedder).created == 0


def test_reindex_replaces_paragraphs(tmp_path, embedder):
    g, lm, src = two_mc_material(tmp_path)
    index_material(g, lm, src, embedder)
    old = {n.id for n in g.nodes(NodeKind.WIKIPEDIA_PARAGRAPH)}
    write_corpus(tmp_path, [("Alpha", paragraphs(2, "alpha v2"), ["Gamma"]), ("Beta", paragraphs(3, "beta"), []),
                            ("Gamma", "Gamma is related and is not embedded at all.", [])])
    summary = index_material(g, lm, FixtureCorpus(tmp_path), embedder)
    assert summary.created == 5 == wp_count(g)
    assert not old & {n.id for n in g.nodes(NodeKind.WIKIPEDIA_PARAGRAPH)}
    alpha = [n for n in g.nodes(NodeKind.MAIN_CONCEPT) if n["article_title"] == "Alpha"][0]
    texts = [wp["paragraph_text"] for wp in g.neighbors(alpha.id, EdgeKind.HAS_PARAGRAPH)]
    assert all("alpha v2" in t for t in texts) and alpha["paragraph_count"] == 2


class FlakyEmbedder(HashEmbedder):
    def embed_batch(self, texts):
        if any("beta" in t for t in texts):
            raise TransportError("embedding endpoint down")
        return super().embed_batch(texts)


def test_provider_failure_isolated_per_mc(tmp_path):
    g, lm, src = two_mc_material(tmp_path)
    summary = index_material(g, lm, src, FlakyEmbedder())
    assert summary.created == 5
    assert list(summary.failures) == ["Beta"]
    beta = [n for n in g.nodes(NodeKind.MAIN_CONCEPT) if n["article_title"] == "Beta"][0]
    with pytest.raises(ContractError, match=beta.id):
        top_k("beta", 3, [beta.id], g, HashEmbedder())


# -- retrieval --------------------------------------------------------------

def slide4_scope(g):
    slide = [n for n in g.nodes(NodeKind.SLIDE) if n["slide_index"] == 4][0]
    return [m.id for m in g.neighbors(slide.id, EdgeKind.CONSISTS_OF) if m.get("indexed")]


def test_self_retrieval(edukg, embedder):
    scope = slide4_scope(edukg)
    wp = edukg.neighbors(scope[0], EdgeKind.HAS_PARAGRAPH)[1]
    [hit] = top_k(wp["paragraph_text"], 1, scope, edukg, embedder)
    assert hit.wp_node_id == wp.id
    assert hit.score == pytest.approx(1.0, abs=1e-6)


def test_saturation(edukg, embedder):
    scope = slide4_scope(edukg)
    total = sum(len(edukg.neighbors(m, EdgeKind.HAS_PARAGRAPH)) for m in scope)
    hits = top_k("anything", 10_000, scope, edukg, embedder)
    assert len(hits) == total
    assert [h.score for h in hits] == sorted((h.score for h in hits), reverse=True)


def test_fixture_query_matches_brute_force(edukg, embedder):
    scope = slide4_scope(edukg)
    hits = top_k("applications of artificial intelligence", 3, scope, edukg, embedder)
    oracle = brute_force_top_k("applications of artificial intelligence", 3, scope, edukg)
    assert [h.wp_node_id for h in hits] == [r[0] for r in oracle]
    assert hits[0].mc_title == "Artificial intelligence"


def test_top_k_contract(edukg, embedder):
    scope = slide4_scope(edukg)
    with pytest.raises(ContractError):
        top_k("q", 0, scope, edukg, embedder)
    with pytest.raises(ContractError):
        top_k("q", 1, [], edukg, embedder)
    untagged = [n for n in edukg.nodes(NodeKind.MAIN_CONCEPT) if not n["article_title"]][0]
    with pytest.raises(ContractError, match=untagged.id):
        top_k("q", 1, [untagged.id], edukg, embedder)


def check_retrieval_case(seed: int) -> None:
    g, query, k, scope = retrieval_case(seed)
    hits = top_k(query, k, scope, g, HashEmbedder())
    oracle = brute_force_top_k(query, k, scope, g)
    assert [h.wp_node_id for h in hits] == [r[0] for r in oracle]
    for h, r in zip(hits, oracle):
        assert abs(h.score - r[3]) <= 1e-9
        assert h.mc_id in scope


def test_retrieval_oracle_sample():
    for seed in range(200):
        check_retrieval_case(seed)
