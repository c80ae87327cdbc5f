"""Record the scripted-provider transcript for the fixture scenario.

A rule-based responder stands in for the chat model: it writes P1 question
lists, answers P2 by copying the first context sentence containing a question
keyword (or NO_ANSWER), and answers P3 with the first candidate mentioning that
keyword (or NONE). The recorded {fingerprint, response} pairs are replayed by
ScriptedProvider in the tests and by the CLI demo.

    python scripts/record_transcript.py [--out fixtures/transcripts/scenario.json]

Re-run after any change to the prompt templates, the fixture corpus or the deck.
"""

from __future__ import annotations

import argparse
import re
import sys
import tempfile
from pathlib import Path

from edurag.embeddings import HashEmbedder
from edurag.ingestion import FixtureCorpus
from edurag.llm import NO_ANSWER, NONE, ChatRequest, Gateway, RecordingProvider
from edurag.service import Engine, ServiceConfig
from edurag.text import sentence_ends

ROOT = Path(__file__).resolve().parents[1]
DECK = ROOT / "fixtures" / "decks" / "intro_ml.json"
CORPUS = ROOT / "fixtures" / "corpus"
DEFAULT_OUT = ROOT / "fixtures" / "transcripts" / "scenario.json"

LEARNER = "farah"
SCENARIO_SLIDE = 4
SCENARIO_CONCEPT = "Artificial Intelligence"
APPLICATIONS_QUESTION = "What are some applications of artificial intelligence?"
FALLBACK_QUESTION = "What is parameter tuning in Machine Learning?"

KEYWORDS = ("applications", "tuning")


def _keyword(question: str) -> str | None:
    q = question.lower()
    return next((k for k in KEYWORDS if k in q), None)


def _field(text: str, name: str) -> str:
    m = re.search(rf"^{name}: (.*)$", text, flags=re.M)
    return m.group(1).strip() if m else ""


def _sentences(text: str) -> list[str]:
    out, start = [], 0
    for end in sentence_ends(text) + [len(text)]:
        piece = " ".join(text[start:end].split())
        if piece:
            out.append(piece)
        start = end
    return out


def respond(request: ChatRequest) -> str:
    user = request.user_text
    if request.template.startswith("qg-p1"):
        c = _field(user, "DNU concept")
        return "\n".join([
            f"1. What is {c}?",
            f"2. What is {c}?",
            f"3. What are some applications of {c.lower()}?",
            f"4. How is {c} related to machine learning?",
            f"5. What are the main subfields of {c}?",
        ])
    keyword = _keyword(_field(user, "Question"))
    if request.template.startswith("qa-p2"):
        body = user.split("Contexts:\n", 1)[1].rsplit("\n\nInstructions:", 1)[0]
        for block in re.split(r"\n\n(?=\[C\d+\] )", body):
            label, text = re.match(r"\[(C\d+)\] (.*)", block, flags=re.S).groups()
            for sentence in _sentences(text):
                if keyword and keyword in sentence.lower():
                    return f"[{label}] {sentence}"
        return NO_ANSWER
    if request.template.startswith("kg-p3"):
        listing = user.split("Related articles:\n", 1)[1].split("\n\n", 1)[0]
        for line in listing.splitlines():
            title = re.match(r"\d+\. ([^:]+)", line).group(1)
            if keyword and keyword in line.lower():
                return title
        return NONE
    raise ValueError(f"unexpected template {request.template!r}")


def record(out: Path) -> Path:
    recorder = RecordingProvider(respond)
    with tempfile.TemporaryDirectory() as tmp:
        config = ServiceConfig(data_dir=tmp, corpus_dir=str(CORPUS), transcript="unused")
        engine = Engine(config, source=FixtureCorpus(CORPUS), embedder=HashEmbedder(),
                        gateway=Gateway(recorder, model_name=config.chat_model))
        material = engine.ingest(DECK.read_bytes())["material_id"]
        concepts = engine.concepts(material, SCENARIO_SLIDE)["main_concepts"]
        concept = next(c for c in concepts if c["name"] == SCENARIO_CONCEPT)
        event = engine.mark_dnu(LEARNER, material, SCENARIO_SLIDE, concept["id"])
        for q in event["questions"]:
            engine.answer(q["question_id"])
        engine.ask(material, SCENARIO_SLIDE, FALLBACK_QUESTION)
    out.parent.mkdir(parents=True, exist_ok=True)
    recorder.dump(out)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = parser.parse_args(argv)
    print(f"wrote {record(args.out)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
