from .client import (
    DEFAULT_MODEL, ChatProvider, ChatRequest, Gateway, RecordingProvider, RemoteChatProvider, RetryPolicy,
    ScriptedProvider, complete, fingerprint,
)
from .parsing import ExtractedAnswer, NoAnswer, parse_answer, parse_question_list, parse_rc_choice
from .prompts import (
    NO_ANSWER, NONE, QG_RULES, TEMPLATE_VERSION, ContextPassage, PromptP1Context, PromptP2Context,
    PromptP3Context, RcCandidate, render_p1, render_p2, render_p3,
)
