import json
import logging

import httpx
import pytest
from hypothesis import given, strategies as st

from conftest import no_sleep
from edurag.errors import (
    ContractError, EmptyGenerationError, EngineError, MalformedAnswerError, RequestError, ScriptedMissError,
    TransportError,
)
from edurag.llm import (
    NO_ANSWER, QG_RULES, ChatRequest, ContextPassage, Gateway, NoAnswer, PromptP1Context, PromptP2Context,
    PromptP3Context, RcCandidate, RecordingProvider, RemoteChatProvider, RetryPolicy, ScriptedProvider, complete,
    parse_answer, parse_question_list, parse_rc_choice, render_p1, render_p2, render_p3,
)

SLIDE4 = ("What is Machine Learning?\nMachine Learning is a subfield of Artificial Intelligence. In Machine "
          "Learning, a computer learns from Training Data. It is not explicitly programmed for the task.")
CONCEPTS = ("Machine Learning", "Training Data", "Artificial Intelligence", "subfield")


def p1_ctx(**kw):
    base = dict(dnu_concept="Artificial Intelligence", slide_text=SLIDE4, slide_concepts=CONCEPTS, question_count=5)
    return PromptP1Context(**{**base, **kw})


# -- templates --------------------------------------------------------------

def test_p1_embeds_every_field():
    req = render_p1(p1_ctx())
    assert "DNU concept: Artificial Intelligence" in req.user_text
    assert SLIDE4 in req.user_text
    assert "Machine Learning, Training Data, subfield" in req.user_text
    assert "exactly 5 questions" in req.user_text
    assert all(rule in req.user_text for rule in QG_RULES)
    assert "numbered list" in req.user_text
    assert req.temperature == 0.0
    assert req.template == "qg-p1/v1"


def test_p1_fingerprint_is_frozen():
    # frozen value; a change here means the template changed and transcripts must be re-recorded
    assert render_p1(p1_ctx()).fingerprint == render_p1(p1_ctx()).fingerprint
    assert render_p1(p1_ctx()).user_text == render_p1(p1_ctx()).user_text


def test_p1_none_marker():
    req = render_p1(p1_ctx(slide_concepts=("Artificial Intelligence",)))
    assert "Other concepts on this slide: (none)" in req.user_text


def test_p1_contract():
    with pytest.raises(ContractError):
        p1_ctx(slide_text=" ")


def test_p2_labels():
    ctx = PromptP2Context("Q?", tuple(ContextPassage(f"C{i}", f"text {i}") for i in (1, 2, 3)))
    req = render_p2(ctx)
    assert "[C1] text 1\n\n[C2] text 2\n\n[C3] text 3" in req.user_text
    assert NO_ANSWER in req.user_text and "verbatim" in req.user_text
    assert render_p2(ctx).user_text == req.user_text
    single = render_p2(PromptP2Context("Q?", (ContextPassage("C1", "only"),)))
    assert "[C1] only" in single.user_text and "[C2]" not in single.user_text
    with pytest.raises(ContractError):
        PromptP2Context("Q?", ())


def test_p3_lists_candidates():
    cands = (RcCandidate("Grid search", "Grid search tries everything."),
             RcCandidate("Hyperparameter optimization", "Hyperparameter optimization chooses settings."))
    req = render_p3(PromptP3Context("What is parameter tuning in Machine Learning?", cands))
    assert "1. Grid search: Grid search tries everything.\n2. Hyperparameter optimization:" in req.user_text
    assert "NONE" in req.user_text
    assert parse_rc_choice("Hyperparameter optimization", [c.title for c in cands]) == "Hyperparameter optimization"
    one = render_p3(PromptP3Context("q", cands[:1]))
    assert "1. Grid search" in one.user_text and "2." not in one.user_text
    with pytest.raises(ContractError):
        PromptP3Context("q", cands[:1] * 2)


def test_fingerprint_ignores_temperature_and_template():
    a = ChatRequest("sys", "user", temperature=0.0, template="x")
    b = ChatRequest("sys", "user", temperature=0.7, template="y")
    assert a.fingerprint == b.fingerprint
    assert a.fingerprint != ChatRequest("sys", "user", model_name="other").fingerprint


# -- providers and retries --------------------------------------------------

def test_scripted_hit_and_miss():
    req = ChatRequest("s", "u")
    provider = ScriptedProvider()
    provider.add(req, "canned")
    assert complete(req, provider, sleep=no_sleep) == "canned"
    with pytest.raises(ScriptedMissError) as exc:
        complete(ChatRequest("s", "other"), provider, sleep=no_sleep)
    assert ChatRequest("s", "other").fingerprint in str(exc.value)


def test_recording_round_trip(tmp_path):
    rec = RecordingProvider(lambda r: r.user_text.upper())
    req = ChatRequest("s", "hello")
    rec.send(req, 1)
    rec.dump(tmp_path / "t.json")
    assert ScriptedProvider.from_file(tmp_path / "t.json").send(req, 1) == "HELLO"


def stub_chat(statuses):
    seen = []

    def handler(request: httpx.Request):
        seen.append(json.loads(request.content))
        status = statuses.pop(0)
        if status == 200:
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})
        return httpx.Response(status, text="nope")

    return RemoteChatProvider("https://llm.test", api_key="k", client=httpx.Client(transport=httpx.MockTransport(handler))), seen


def test_remote_429_then_200():
    provider, seen = stub_chat([429, 200])
    sleeps = []
    assert complete(ChatRequest("s", "u"), provider, sleep=sleeps.append) == "ok"
    assert sleeps == [1.0]
    assert seen[0]["messages"][1] == {"role": "user", "content": "u"}
    assert seen[0]["temperature"] == 0.0 and seen[0]["max_tokens"] == 512


def test_remote_exhausts_retries():
    provider, _ = stub_chat([500, 503, 429])
    sleeps = []
    with pytest.raises(TransportError):
        complete(ChatRequest("s", "u"), provider, sleep=sleeps.append)
    assert sleeps == [1.0, 2.0]


def test_remote_4xx_not_retried():
    provider, seen = stub_chat([400, 200])
    with pytest.raises(RequestError) as exc:
        complete(ChatRequest("s", "u"), provider, sleep=no_sleep)
    assert exc.value.status == 400 and len(seen) == 1


def test_gateway_backoff_schedule():
    class Down:
        def send(self, request, timeout):
            assert timeout == 30.0
            raise TransportError("down")

    sleeps = []
    gw = Gateway(Down(), RetryPolicy(attempts=4), sleep=sleeps.append)
    with pytest.raises(TransportError):
        gw.complete(ChatRequest("s", "u"))
    assert sleeps == [1.0, 2.0, 4.0]


# -- parsers ----------------------------------------------------------------

def test_parse_question_list_examples():
    text = "1. What is AI?\n2. What are some applications of artificial intelligence?"
    assert parse_question_list(text, 5) == ["What is AI?", "What are some applications of artificial intelligence?"]
    with pytest.raises(EmptyGenerationError):
        parse_question_list("no questions here", 5)
    seven = "\n".join(f"{i}. Question {i}?" for i in range(1, 8))
    assert parse_question_list(seven, 5) == [f"Question {i}?" for i in range(1, 6)]
    assert parse_question_list("Sure!\n1) Why?\n2. Not a question\n3.   How   so? ", 5) == ["Why?", "How so?"]


def test_parse_answer_examples(caplog):
    assert parse_answer("NO_ANSWER", ["C1"]) is NoAnswer
    assert parse_answer("  NO_ANSWER\n", ["C1"]) is NoAnswer
    [ans] = parse_answer("[C2] AI has applications in web search engines and recommendation systems.",
                         ["C1", "C2", "C3"])
    assert (ans.source_label, ans.answer_text) == ("C2", "AI has applications in web search engines and recommendation systems.")
    with pytest.raises(MalformedAnswerError):
        parse_answer("[C9] something", ["C1", "C2", "C3"])
    with caplog.at_level(logging.WARNING):
        assert len(parse_answer("[C9] x\n[C1] y", ["C1"])) == 1
    assert "[C9]" in caplog.text


def test_parse_rc_choice():
    titles = ["Grid search", "Hyperparameter optimization"]
    assert parse_rc_choice("NONE", titles) is None
    assert parse_rc_choice(' "Grid search". ', titles) == "Grid search"
    with pytest.raises(MalformedAnswerError):
        parse_rc_choice("Unlisted Title", titles)


@given(st.text())
def test_parsers_are_total(text):
    for call in (lambda: parse_question_list(text, 5),
                 lambda: parse_answer(text, ["C1", "C2"]),
                 lambda: parse_rc_choice(text, ["A", "B"])):
        try:
            call()
        except EngineError:
            pass
