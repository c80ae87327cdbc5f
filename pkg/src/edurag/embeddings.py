"""Embedding providers and cosine similarity.

``HashEmbedder`` is the bit-exact deterministic test provider: signed feature
hashing of lowercase alphanumeric tokens into 256 buckets via FNV-1a 64.
"""

from __future__ import annotations

import math
import os
from typing import Protocol, Sequence

import httpx

from .errors import ContractError, RequestError, TransportError
from .text import STOP_WORDS, tokens

Vector = tuple[float, ...]

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed_batch(self, texts: Sequence[str]) -> list[Vector]: ...


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def l2_normalize(vec: Sequence[float]) -> Vector:
    norm = math.sqrt(math.fsum(x * x for x in vec))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return tuple(x / norm for x in vec)


def dot(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise ContractError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return math.fsum(x * y for x, y in zip(a, b))


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    d = dot(a, b)
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return d / (na * nb)


class HashEmbedder:
    name = "hash-fnv1a-256"

    def __init__(self, dimension: int = 256):
        self.dimension = dimension

    def embed(self, text: str) -> Vector:
        vec = [0.0] * self.dimension
        for tok in tokens(text):
            if tok.text in STOP_WORDS:
                continue
            h = fnv1a_64(tok.text.encode("utf-8"))
            vec[h % self.dimension] += -1.0 if h >> 63 else 1.0
        if not any(vec):
            vec[0] = 1.0
        return l2_normalize(vec)

    def embed_batch(self, texts: Sequence[str]) -> list[Vector]:
        return [self.embed(t) for t in texts]


class RemoteEmbedder:
    """``POST {base_url}/v1/embeddings`` with ``{model, input}``; vectors at ``data[i].embedding``."""

    def __init__(self, base_url: str, model: str, dimension: int, *, api_key: str | None = None,
                 client: httpx.Client | None = None, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.name = model
        self.dimension = dimension
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY", "")
        self.client = client or httpx.Client(timeout=timeout)

    def embed_batch(self, texts: Sequence[str]) -> list[Vector]:
        if not texts:
            return []
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = self.client.post(self.base_url + "/v1/embeddings",
                                    json={"model": self.name, "input": list(texts)}, headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"embedding endpoint returned {resp.status_code}")
        if resp.status_code >= 400:
            raise RequestError(f"embedding endpoint rejected request: {resp.status_code}", resp.status_code)
        data = sorted(resp.json()["data"], key=lambda d: d.get("index", 0))
        out = []
        for item in data:
            vec = item["embedding"]
            if len(vec) != self.dimension:
                raise ContractError(f"expected dimension {self.dimension}, got {len(vec)}")
            out.append(l2_normalize(vec))
        return out
