"""Co-occurrence graph keyphrase ranking (TextRank-style) for slide text.

Candidates are maximal runs of non-stop-word tokens separated only by spaces
or tabs; punctuation and line breaks end a run. Token centrality comes from
PageRank over an undirected, unweighted co-occurrence graph built with a
sliding window over the candidate-token sequence; a phrase scores the sum of
its token centralities.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ContractError
from ..text import is_stop, normalize_ws, tokens

WINDOW = 4
DAMPING = 0.85
TOLERANCE = 1e-6
MAX_ITER = 100


@dataclass(frozen=True)
class Keyphrase:
    phrase: str  # lowercased, single-spaced
    surface: str  # first occurrence as written
    score: float
    position: int  # char offset of first occurrence


def candidate_runs(text: str) -> list[list]:
    runs: list[list] = []
    current: list = []
    prev_end = None
    for tok in tokens(text):
        gap = text[prev_end : tok.start] if prev_end is not None else ""
        joined_by_space = prev_end is not None and not gap.strip(" \t")
        if is_stop(tok.text):
            if current:
                runs.append(current)
            current = []
        else:
            if current and not joined_by_space:
                runs.append(current)
                current = []
            current.append(tok)
        prev_end = tok.end
    if current:
        runs.append(current)
    return runs


def cooccurrence_graph(words: list[str], window: int = WINDOW) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {w: set() for w in words}
    for i, w in enumerate(words):
        for j in range(i + 1, min(i + window, len(words))):
            if words[j] != w:
                adj[w].add(words[j])
                adj[words[j]].add(w)
    return adj


def pagerank(
    adj: dict[str, set[str]],
    damping: float = DAMPING,
    tol: float = TOLERANCE,
    max_iter: int = MAX_ITER,
) -> dict[str, float]:
    """Power iteration; isolated nodes spread their mass uniformly.

    Stops once the L1 change between iterates drops below ``tol``.
    """
    nodes = list(adj)
    n = len(nodes)
    if n == 0:
        return {}
    x = {v: 1.0 / n for v in nodes}
    for _ in range(max_iter):
        dangling = sum(x[v] for v in nodes if not adj[v])
        base = (1.0 - damping) / n + damping * dangling / n
        new = {}
        for v in nodes:
            new[v] = base + damping * sum(x[u] / len(adj[u]) for u in adj[v])
        err = sum(abs(new[v] - x[v]) for v in nodes)
        x = new
        if err < tol:
            break
    return x


def rank_keyphrases(text: str) -> list[Keyphrase]:
    runs = candidate_runs(text)
    words = [t.text for run in runs for t in run]
    centrality = pagerank(cooccurrence_graph(words))
    seen: dict[str, Keyphrase] = {}
    for run in runs:
        phrase = " ".join(t.text for t in run)
        if phrase in seen:
            continue
        surface = normalize_ws(text[run[0].start : run[-1].end])
        score = sum(centrality[t.text] for t in run)
        seen[phrase] = Keyphrase(phrase, surface, score, run[0].start)
    return sorted(seen.values(), key=lambda k: (-k.score, k.position))


def extract_main_concepts(slide_text: str, max_concepts: int = 10) -> list[str]:
    if max_concepts < 1:
        raise ContractError("max_concepts must be >= 1")
    if not slide_text.strip():
        raise ContractError("slide_text must be non-empty")
    return [k.phrase for k in rank_keyphrases(slide_text)[:max_concepts]]
