import pytest
from hypothesis import given, strategies as st

from conftest import TRANSCRIPT, no_sleep, scripted_gateway
from edurag.embeddings import HashEmbedder, cosine
from edurag.errors import ContractError, GenerationFailedError, StateError
from edurag.graph import EdgeKind, KnowledgeGraph, NodeKind
from edurag.llm import Gateway, PromptP1Context, ScriptedProvider, render_p1
from edurag.qgen import (
    DEDUP_THRESHOLD_HASH, dedup_semantic, generate_questions, recommend_questions, rerank, retrieve_qg_context,
)
from oracles import reference_embed, reference_fnv1a_64

APPLICATIONS = "What are some applications of artificial intelligence?"


def slide_and_ai(g):
    slide = [n for n in g.nodes(NodeKind.SLIDE) if n["slide_index"] == 4][0]
    ai = [m for m in g.neighbors(slide.id, EdgeKind.CONSISTS_OF) if m["concept_name"] == "Artificial Intelligence"][0]
    return slide, ai


@pytest.fixture
def farah(edukg):
    slide, ai = slide_and_ai(edukg)
    learner = edukg.add_node(NodeKind.LEARNER, {"learner_name": "farah"})
    edukg.mark_dnu(learner, ai.id)
    return learner, slide, ai


def test_scenario_context(edukg, farah):
    learner, slide, ai = farah
    ctx = retrieve_qg_context(edukg, learner, ai.id, slide.id)
    assert ctx.slide_text == slide["slide_text"]
    assert ctx.dnu_concept == "Artificial Intelligence"
    assert ctx.slide_concepts == tuple(m["concept_name"] for m in edukg.neighbors(slide.id, EdgeKind.CONSISTS_OF))
    assert "Artificial Intelligence" in ctx.slide_concepts


def test_context_errors(edukg, farah):
    learner, slide, ai = farah
    other = [n for n in edukg.nodes(NodeKind.SLIDE) if n["slide_index"] == 1][0]
    with pytest.raises(ContractError):
        retrieve_qg_context(edukg, learner, ai.id, other.id)
    ml = [m for m in edukg.neighbors(slide.id, EdgeKind.CONSISTS_OF) if m["concept_name"] == "Machine Learning"][0]
    with pytest.raises(StateError):
        retrieve_qg_context(edukg, learner, ml.id, slide.id)


def shared_concept_graph():
    g = KnowledgeGraph()
    a = g.add_node(NodeKind.SLIDE, {"slide_text": "Slide A text"})
    b = g.add_node(NodeKind.SLIDE, {"slide_text": "Slide B text"})
    mc = g.add_node(NodeKind.MAIN_CONCEPT, {"concept_name": "Graphs", "article_title": "Graph"})
    g.add_edge(a, EdgeKind.CONSISTS_OF, mc)
    g.add_edge(b, EdgeKind.CONSISTS_OF, mc)
    learner = g.add_node(NodeKind.LEARNER, {"learner_name": "l"})
    g.mark_dnu(learner, mc)
    return g, learner, mc, a


def test_single_mc_slide_and_shared_concept():
    g, learner, mc, a = shared_concept_graph()
    ctx = retrieve_qg_context(g, learner, mc, a)
    assert ctx.slide_concepts == ("Graphs",)
    assert ctx.slide_text == "Slide A text"


def test_scenario_generation_from_transcript(edukg, farah):
    learner, slide, ai = farah
    ctx = retrieve_qg_context(edukg, learner, ai.id, slide.id)
    gw = Gateway(ScriptedProvider.from_file(TRANSCRIPT), sleep=no_sleep)
    questions = generate_questions(ctx, gw)
    assert len(questions) == 5
    assert APPLICATIONS in questions
    assert all(q.endswith("?") for q in questions)


def test_generation_retry_then_failure():
    g, learner, mc, a = shared_concept_graph()
    ctx = retrieve_qg_context(g, learner, mc, a)
    req = render_p1(PromptP1Context(ctx.dnu_concept, ctx.slide_text, ctx.slide_concepts))
    gw = scripted_gateway({req.fingerprint: "I cannot think of anything."})
    with pytest.raises(GenerationFailedError):
        generate_questions(ctx, gw)
    assert len(gw.provider.calls) == 2


def test_dedup_examples():
    e = HashEmbedder()
    assert dedup_semantic(["What is AI?", "What is AI?"], e, 0.9) == ["What is AI?"]
    assert dedup_semantic(["Only one?"], e, 0.9) == ["Only one?"]
    # derived: "ai" and "overfitting" land in different buckets, so the cosine is 0
    assert reference_fnv1a_64("ai") % 256 != reference_fnv1a_64("overfitting") % 256
    assert cosine(e.embed("What is AI?"), e.embed("What is overfitting?")) < 0.9
    assert dedup_semantic(["What is AI?", "What is overfitting?"], e, 0.9) == ["What is AI?", "What is overfitting?"]


questions = st.lists(st.lists(st.sampled_from(["ai", "data", "model", "what", "is", "graph"]), min_size=1, max_size=5)
                     .map(lambda ws: " ".join(ws) + "?"), max_size=8)


@given(questions, st.floats(0.3, 1.0))
def test_dedup_idempotent_and_separated(qs, threshold):
    e = HashEmbedder()
    once = dedup_semantic(qs, e, threshold)
    assert dedup_semantic(once, e, threshold) == once
    for i, a in enumerate(once):
        for b in once[i + 1:]:
            assert a != b and cosine(e.embed(a), e.embed(b)) < threshold


def test_rerank_self_similarity_first():
    slide = "Machine learning is a subfield of artificial intelligence."
    ranked = rerank(["What is overfitting?", slide, "Why data?"], slide, HashEmbedder())
    assert ranked[0].text == slide
    assert ranked[0].rank_score == pytest.approx(1.0, abs=1e-6)


def test_rerank_matches_oracle_and_keeps_ties():
    slide = "training data model"
    qs = ["What is a model?", "What is training?", "Which data?"]
    ranked = rerank(qs, slide, HashEmbedder())
    s = reference_embed(slide)
    oracle = sorted(range(3), key=lambda i: -sum(a * b for a, b in zip(reference_embed(qs[i]), s)))
    assert [q.text for q in ranked] == [qs[i] for i in oracle]
    tied = rerank(["Zebra?", "Quokka?"], "nothing shared", HashEmbedder())
    assert [q.text for q in tied] == ["Zebra?", "Quokka?"]
    with pytest.raises(ContractError):
        rerank([], slide, HashEmbedder())


def test_recommend_is_deterministic(edukg, farah):
    learner, slide, ai = farah
    runs = []
    for _ in range(2):
        gw = Gateway(ScriptedProvider.from_file(TRANSCRIPT), sleep=no_sleep)
        out = recommend_questions(edukg, learner, ai.id, slide.id, gw, HashEmbedder(), threshold=DEDUP_THRESHOLD_HASH)
        runs.append([(q.question_id, q.text, q.rank_score) for q in out])
    assert runs[0] == runs[1]
    texts = [t for _, t, _ in runs[0]]
    assert len(texts) == len(set(texts)) >= 3 and APPLICATIONS in texts
    slide_vec = HashEmbedder().embed(slide["slide_text"])
    for _, text, score in runs[0]:
        assert score == pytest.approx(cosine(HashEmbedder().embed(text), slide_vec), abs=1e-12)
