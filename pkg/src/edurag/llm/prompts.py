"""Prompt templates: question generation (P1), extractive QA (P2), RC retrieval (P3).

Rendering is a pure function of the context, so request fingerprints are stable.
Bump TEMPLATE_VERSION whenever wording changes; recorded transcripts depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ContractError
from .client import DEFAULT_MODEL, ChatRequest

TEMPLATE_VERSION = "1"

NO_ANSWER = "NO_ANSWER"
NONE = "NONE"

QG_RULES: tuple[str, ...] = (
    "Every question must be about the DNU concept.",
    "Use only the slide text and the listed slide concepts as grounding.",
    "Do not repeat questions that are semantically similar.",
    "Each question must be answerable from encyclopedic material.",
    "Write each question as one sentence ending with '?'.",
)

ROLE = "You are a tutor for an online course."


@dataclass(frozen=True)
class PromptP1Context:
    dnu_concept: str
    slide_text: str
    slide_concepts: tuple[str, ...]
    qg_rules: tuple[str, ...] = QG_RULES
    question_count: int = 5

    def __post_init__(self):
        if not self.slide_text.strip():
            raise ContractError("slide_text must be non-empty")
        if self.question_count < 1:
            raise ContractError("question_count must be >= 1")


@dataclass(frozen=True)
class ContextPassage:
    source_label: str
    text: str


@dataclass(frozen=True)
class PromptP2Context:
    question: str
    contexts: tuple[ContextPassage, ...]

    def __post_init__(self):
        if not self.contexts:
            raise ContractError("at least one context is required")
        labels = [c.source_label for c in self.contexts]
        if len(set(labels)) != len(labels):
            raise ContractError("context labels must be unique")


@dataclass(frozen=True)
class RcCandidate:
    title: str
    first_sentence: str


@dataclass(frozen=True)
class PromptP3Context:
    question: str
    rc_candidates: tuple[RcCandidate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.rc_candidates:
            raise ContractError("at least one related-concept candidate is required")
        titles = [c.title for c in self.rc_candidates]
        if len(set(titles)) != len(titles):
            raise ContractError("related-concept candidates must be deduplicated")


def _stamp(name: str) -> str:
    return f"{name}/v{TEMPLATE_VERSION}"


def render_p1(ctx: PromptP1Context, model_name: str = DEFAULT_MODEL, temperature: float = 0.0) -> ChatRequest:
    others = [c for c in ctx.slide_concepts if c.casefold() != ctx.dnu_concept.casefold()]
    rules = "\n".join(f"{i}. {rule}" for i, rule in enumerate(ctx.qg_rules, 1))
    system = (
        f"{ROLE} A learner marked a concept on a lecture slide as 'Did Not Understand' (DNU). "
        "Suggest questions that would help the learner understand that concept.\n"
        f"[template {_stamp('qg-p1')}]"
    )
    user = (
        f"DNU concept: {ctx.dnu_concept}\n\n"
        f"Slide text:\n\"\"\"\n{ctx.slide_text.strip()}\n\"\"\"\n\n"
        f"Other concepts on this slide: {', '.join(others) if others else '(none)'}\n\n"
        f"Rules:\n{rules}\n\n"
        f"Write exactly {ctx.question_count} questions.\n"
        "Output format: a numbered list, one question per line, like\n"
        "1. <question>?\n"
        "Do not write any preamble or closing remarks."
    )
    return ChatRequest(system, user, temperature=temperature, model_name=model_name, template=_stamp("qg-p1"))


def render_p2(ctx: PromptP2Context, model_name: str = DEFAULT_MODEL, temperature: float = 0.0) -> ChatRequest:
    system = (
        f"{ROLE} Answer the learner's question by extracting text from the provided Wikipedia contexts. "
        "Never add information that is not in the contexts.\n"
        f"[template {_stamp('qa-p2')}]"
    )
    blocks = "\n\n".join(f"[{c.source_label}] {c.text.strip()}" for c in ctx.contexts)
    user = (
        f"Question: {ctx.question.strip()}\n\n"
        f"Contexts:\n{blocks}\n\n"
        "Instructions:\n"
        "- Answer ONLY with sentences copied verbatim from the contexts above. Do not paraphrase.\n"
        "- Put each answer on its own line, prefixed with the label of its context in square brackets, "
        "for example: [C1] <copied sentence>\n"
        f"- If no context answers the question, output exactly {NO_ANSWER} and nothing else."
    )
    return ChatRequest(system, user, temperature=temperature, model_name=model_name, template=_stamp("qa-p2"))


def render_p3(ctx: PromptP3Context, model_name: str = DEFAULT_MODEL, temperature: float = 0.0) -> ChatRequest:
    system = (
        f"{ROLE} You navigate a knowledge graph of Wikipedia articles related to the concepts of a lecture "
        "slide, and decide which related article most likely contains the answer to a question.\n"
        f"[template {_stamp('kg-p3')}]"
    )
    listing = "\n".join(
        f"{i}. {c.title}: {c.first_sentence}" if c.first_sentence else f"{i}. {c.title}"
        for i, c in enumerate(ctx.rc_candidates, 1)
    )
    user = (
        f"Question: {ctx.question.strip()}\n\n"
        f"Related articles:\n{listing}\n\n"
        "Reply with exactly one article title, copied verbatim from the list, whose article most likely "
        f"answers the question. If none of them is likely to, reply exactly {NONE}. "
        "Do not add any other text."
    )
    return ChatRequest(system, user, temperature=temperature, model_name=model_name, template=_stamp("kg-p3"))
