"""Service configuration: one YAML/JSON document of ServiceConfig fields."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..errors import ValidationError
from ..qgen import DEDUP_THRESHOLD_HASH, DEDUP_THRESHOLD_REMOTE

_PATH_FIELDS = ("data_dir", "corpus_dir", "transcript")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: str = "data"

    # article source: "fixture" (corpus_dir) or "live" (wiki_base_url)
    source: str = "fixture"
    corpus_dir: str = "fixtures/corpus"
    wiki_base_url: str = "https://en.wikipedia.org"

    # chat provider: "scripted" (transcript) or "remote"
    chat_provider: str = "scripted"
    transcript: str | None = None
    chat_base_url: str = "https://api.openai.com"
    chat_model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    timeout: float = 30.0
    max_concurrency: int = 8

    # embedding provider: "hash" or "remote"
    embedding_provider: str = "hash"
    embedding_base_url: str = "https://api.openai.com"
    embedding_model: str = "text-embedding-3-small"
    embedding_dimension: int = 1536

    question_count: int = 5
    retrieval_k: int = 5
    similarity_floor: float = 0.15
    dedup_threshold: float | None = None  # None: provider default
    max_concepts: int = 10
    max_rcs: int = 100
    rc_candidate_cap: int = 50
    fanout: int = 4

    @property
    def effective_dedup_threshold(self) -> float:
        if self.dedup_threshold is not None:
            return self.dedup_threshold
        return DEDUP_THRESHOLD_HASH if self.embedding_provider == "hash" else DEDUP_THRESHOLD_REMOTE

    def validate(self) -> None:
        checks = [
            (self.source in ("fixture", "live"), "source must be fixture|live"),
            (self.chat_provider in ("scripted", "remote"), "chat_provider must be scripted|remote"),
            (self.embedding_provider in ("hash", "remote"), "embedding_provider must be hash|remote"),
            (self.chat_provider != "scripted" or bool(self.transcript), "scripted chat needs a transcript"),
            (self.question_count >= 1, "question_count must be >= 1"),
            (self.retrieval_k >= 1, "retrieval_k must be >= 1"),
            (-1.0 <= self.similarity_floor <= 1.0, "similarity_floor must be in [-1, 1]"),
            (0.0 < self.effective_dedup_threshold <= 1.0, "dedup_threshold must be in (0, 1]"),
            (self.max_concepts >= 1 and self.max_rcs >= 0, "max_concepts >= 1 and max_rcs >= 0"),
            (self.rc_candidate_cap >= 1, "rc_candidate_cap must be >= 1"),
            (self.fanout >= 1 and self.max_concurrency >= 1, "fanout and max_concurrency must be >= 1"),
            (self.temperature >= 0 and self.timeout > 0, "temperature >= 0 and timeout > 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ValidationError(message)

    def ensure_data_dir(self) -> Path:
        path = Path(self.data_dir)
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        try:
            probe.write_text("ok")
            probe.unlink()
        except OSError as exc:
            raise ValidationError(f"data directory {path} is not writable: {exc}") from None
        return path

    @classmethod
    def from_mapping(cls, raw: dict, base_dir: str | Path | None = None) -> "ServiceConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        if base_dir is not None:
            for name in _PATH_FIELDS:
                value = getattr(cfg, name)
                if value and not os.path.isabs(value):
                    setattr(cfg, name, str(Path(base_dir) / value))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        if not isinstance(raw, dict):
            raise ValidationError(f"config {path} must be a mapping")
        return cls.from_mapping(raw, base_dir=path.parent)
