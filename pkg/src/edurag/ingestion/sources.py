"""Article sources: a local fixture corpus and a live MediaWiki REST client."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol
from urllib.parse import quote

import httpx

from ..errors import NotFoundError, RequestError, TransportError
from ..text import normalize_ws

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Article:
    title: str
    article_id: str
    text: str
    links: tuple[str, ...] = ()


@dataclass(frozen=True)
class ArticleRef:
    title: str
    article_id: str
    summary_text: str
    link_titles: tuple[str, ...] = field(default_factory=tuple)


def clean_links(title: str, links) -> tuple[str, ...]:
    out: list[str] = []
    seen = {title.casefold()}
    for link in links:
        link = normalize_ws(link)
        if link and link.casefold() not in seen:
            seen.add(link.casefold())
            out.append(link)
    return tuple(out)


def summary_of(text: str) -> str:
    for block in re.split(r"\n\s*\n", text):
        if block.strip():
            return normalize_ws(block)
    return ""


def to_ref(article: Article) -> ArticleRef:
    return ArticleRef(article.title, article.article_id, summary_of(article.text), clean_links(article.title, article.links))


class ArticleSource(Protocol):
    def search(self, phrase: str) -> list[ArticleRef]: ...

    def fetch(self, title: str) -> Article: ...


class EmptySource:
    """Source with no articles at all."""

    def search(self, phrase: str) -> list[ArticleRef]:
        return []

    def fetch(self, title: str) -> Article:
        raise NotFoundError(f"no article titled {title!r}")


class FixtureCorpus:
    """Reads ``articles/*.json`` ({title, text, links}) and ``search_index.json``.

    The search index maps lowercase phrases to ranked article titles. Phrases not
    in the index fall back to a case-insensitive exact title match.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._articles: dict[str, Article] = {}
        for path in sorted((self.root / "articles").glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            art = Article(doc["title"], str(doc.get("id", path.stem)), doc["text"], tuple(doc.get("links", ())))
            self._articles[art.title.casefold()] = art
        index_path = self.root / "search_index.json"
        raw = json.loads(index_path.read_text(encoding="utf-8")) if index_path.exists() else {}
        self._index = {normalize_ws(k).lower(): list(v) for k, v in raw.items()}

    def titles(self) -> list[str]:
        return [a.title for a in self._articles.values()]

    def search(self, phrase: str) -> list[ArticleRef]:
        key = normalize_ws(phrase).lower()
        titles = self._index.get(key)
        if titles is None:
            titles = [key] if key in self._articles else []
        return [to_ref(self._articles[t.casefold()]) for t in titles if t.casefold() in self._articles]

    def fetch(self, title: str) -> Article:
        try:
            return self._articles[normalize_ws(title).casefold()]
        except KeyError:
            raise NotFoundError(f"no article titled {title!r}") from None


_LINK_RE = re.compile(r"\[\[([^\[\]|#]+)(?:#[^\[\]|]*)?(?:\|([^\[\]]*))?\]\]")
_SKIP_NAMESPACES = ("file:", "image:", "category:", "wikipedia:", "help:", "template:", "portal:")


def wikitext_links(source: str) -> list[str]:
    out = []
    for m in _LINK_RE.finditer(source):
        target = m.group(1).strip()
        if target and not target.lower().startswith(_SKIP_NAMESPACES):
            out.append(target[0].upper() + target[1:].replace("_", " "))
    return out


def wikitext_to_text(source: str) -> str:
    """Crude wikitext -> plain text; keeps blank-line paragraph breaks."""
    text = re.sub(r"<!--.*?-->", "", source, flags=re.S)
    text = re.sub(r"<ref[^>]*/>", "", text)
    text = re.sub(r"<ref[^>]*>.*?</ref>", "", text, flags=re.S)
    prev = None
    while prev != text:  # innermost templates and tables first
        prev = text
        text = re.sub(r"\{\{[^{}]*\}\}", "", text)
        text = re.sub(r"\{\|[^{}]*?\|\}", "", text, flags=re.S)
    text = re.sub(r"\[\[(?:File|Image|Category):[^\[\]]*(?:\[\[[^\]]*\]\][^\[\]]*)*\]\]", "", text, flags=re.I)
    text = _LINK_RE.sub(lambda m: (m.group(2) or m.group(1)).strip(), text)
    text = re.sub(r"\[https?://\S+\s*([^\]]*)\]", r"\1", text)
    text = re.sub(r"'{2,}", "", text)
    text = re.sub(r"^=+[^=\n]+=+\s*$", "", text, flags=re.M)
    text = re.sub(r"<[^>]+>", "", text)
    return re.sub(r"\n{3,}", "\n\n", text).strip()


class WikipediaSource:
    """MediaWiki REST API (``/w/rest.php/v1``) behind the ArticleSource interface."""

    def __init__(self, base_url: str = "https://en.wikipedia.org", *, client: httpx.Client | None = None,
                 timeout: float = 30.0, search_limit: int = 3):
        self.base_url = base_url.rstrip("/")
        self.client = client or httpx.Client(timeout=timeout, headers={"User-Agent": "edurag/0.1"})
        self.search_limit = search_limit

    def _get(self, path: str, params: dict | None = None) -> dict:
        try:
            resp = self.client.get(self.base_url + path, params=params)
        except httpx.HTTPError as exc:
            raise TransportError(f"article source unavailable: {exc}") from exc
        if resp.status_code == 404:
            raise NotFoundError(f"not found: {path}")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"article source returned {resp.status_code}")
        if resp.status_code >= 400:
            raise RequestError(f"article source rejected request: {resp.status_code}", resp.status_code)
        return resp.json()

    def search(self, phrase: str) -> list[ArticleRef]:
        doc = self._get("/w/rest.php/v1/search/page", {"q": phrase, "limit": self.search_limit})
        refs = []
        for page in doc.get("pages", []):
            try:
                refs.append(to_ref(self.fetch(page["title"])))
            except NotFoundError:
                log.warning("search hit %r vanished before fetch", page.get("title"))
        return refs

    def fetch(self, title: str) -> Article:
        doc = self._get("/w/rest.php/v1/page/" + quote(title.replace(" ", "_"), safe=""))
        source = doc.get("source", "")
        return Article(doc.get("title", title), str(doc.get("id", "")), wikitext_to_text(source),
                       tuple(wikitext_links(source)))
