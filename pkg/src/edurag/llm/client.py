"""Chat-completion providers and the retrying gateway in front of them."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx

from ..errors import ContractError, RequestError, ScriptedMissError, TransportError

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-3.5-turbo"


@dataclass(frozen=True)
class ChatRequest:
    system_text: str
    user_text: str
    temperature: float = 0.0
    max_output_tokens: int = 512
    model_name: str = DEFAULT_MODEL
    template: str = ""  # template id + version, for logs and reports

    def __post_init__(self):
        if not self.system_text.strip() or not self.user_text.strip():
            raise ContractError("chat request texts must be non-empty")
        if self.temperature < 0:
            raise ContractError("temperature must be >= 0")

    @property
    def fingerprint(self) -> str:
        return fingerprint(self)


def fingerprint(request: ChatRequest) -> str:
    """Stable hash of (system_text, user_text, model_name)."""
    payload = json.dumps([request.system_text, request.user_text, request.model_name], ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:32]


class ChatProvider(Protocol):
    def send(self, request: ChatRequest, timeout: float) -> str: ...


class ScriptedProvider:
    """Replays canned responses keyed by request fingerprint."""

    def __init__(self, script: dict[str, str] | None = None):
        self.script = dict(script or {})
        self.calls: list[str] = []

    def add(self, request: ChatRequest, response: str) -> None:
        self.script[request.fingerprint] = response

    def send(self, request: ChatRequest, timeout: float) -> str:
        fp = request.fingerprint
        self.calls.append(fp)
        try:
            return self.script[fp]
        except KeyError:
            raise ScriptedMissError(fp) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        """Transcript file: a JSON list of ``{fingerprint, response}`` records."""
        records = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls({r["fingerprint"]: r["response"] for r in records})


class RecordingProvider:
    """Answers with a callable and keeps a transcript that ScriptedProvider can replay."""

    def __init__(self, responder: Callable[[ChatRequest], str]):
        self.responder = responder
        self.records: dict[str, dict] = {}

    def send(self, request: ChatRequest, timeout: float) -> str:
        response = self.responder(request)
        self.records.setdefault(
            request.fingerprint,
            {"fingerprint": request.fingerprint, "template": request.template, "response": response},
        )
        return response

    def dump(self, path: str | Path) -> None:
        records = sorted(self.records.values(), key=lambda r: r["fingerprint"])
        Path(path).write_text(json.dumps(records, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


class RemoteChatProvider:
    """OpenAI-style ``POST {base_url}/v1/chat/completions``."""

    def __init__(self, base_url: str, *, api_key: str | None = None, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY", "")
        self.client = client or httpx.Client()

    def send(self, request: ChatRequest, timeout: float) -> str:
        body = {
            "model": request.model_name,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = self.client.post(self.base_url + "/v1/chat/completions", json=body, headers=headers,
                                    timeout=timeout)
        except httpx.HTTPError as exc:
            raise TransportError(f"chat request failed: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"chat endpoint returned {resp.status_code}")
        if resp.status_code >= 400:
            raise RequestError(f"chat endpoint rejected request ({resp.status_code}): {resp.text[:200]}",
                               resp.status_code)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected chat response shape: {exc}") from exc


@dataclass
class RetryPolicy:
    attempts: int = 3
    backoff: tuple[float, ...] = (1.0, 2.0, 4.0)
    timeout: float = 30.0


@dataclass
class Gateway:
    """Wraps a provider with retries and a global concurrency ceiling."""

    provider: ChatProvider
    policy: RetryPolicy = field(default_factory=RetryPolicy)
    max_concurrency: int = 8
    model_name: str = DEFAULT_MODEL
    temperature: float = 0.0
    sleep: Callable[[float], None] = time.sleep

    def __post_init__(self):
        self._slots = threading.BoundedSemaphore(self.max_concurrency)

    def complete(self, request: ChatRequest) -> str:
        return complete(request, self.provider, self.policy, sleep=self.sleep, slots=self._slots)


def complete(
    request: ChatRequest,
    provider: ChatProvider,
    policy: RetryPolicy | None = None,
    *,
    sleep: Callable[[float], None] = time.sleep,
    slots: threading.Semaphore | None = None,
) -> str:
    """Send ``request``; transport errors are retried with exponential backoff."""
    policy = policy or RetryPolicy()
    last: TransportError | None = None
    for attempt in range(policy.attempts):
        if attempt:
            delay = policy.backoff[min(attempt - 1, len(policy.backoff) - 1)]
            log.info("retrying %s in %.1fs after: %s", request.template or "request", delay, last)
            sleep(delay)
        try:
            if slots is None:
                return provider.send(request, policy.timeout)
            with slots:
                return provider.send(request, policy.timeout)
        except TransportError as exc:
            last = exc
    raise TransportError(f"gave up after {policy.attempts} attempts: {last}") from last
