"""Budget-constrained extractive summarization.

Sentences are scored by graph centrality: TF-IDF cosine similarities are
binarized at a threshold, the adjacency is degree-normalized into a
stochastic matrix, and a damped power iteration yields a stationary score
per sentence.  Selection walks the score ranking (position breaks ties) up
to the sentence ceiling; whenever the assembled summary exceeds the token
budget the most recently added - i.e. lowest ranked - sentence is dropped,
down to a single sentence, which is kept even if it alone overflows.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .preprocess import AnalysisUnit, TokenCounterConfig, count_tokens, split_sentences, unit_id_of

_TERM_RE = re.compile(r"\w+")


@dataclass(frozen=True)
class CentralityConfig:
    damping: float = 0.85
    epsilon: float = 1e-4
    max_iterations: int = 200

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValidationError("damping must be in (0, 1]")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.max_iterations <= 0:
            raise ValidationError("max_iterations must be positive")


@dataclass(frozen=True)
class SummaryConfig:
    min_sentences: int = 3
    max_sentences: int = 26
    budget_tokens: int = 512

    def __post_init__(self):
        if not 1 <= self.min_sentences <= self.max_sentences:
            raise ValidationError("need 1 <= min_sentences <= max_sentences")
        if self.budget_tokens <= 0:
            raise ValidationError("budget_tokens must be positive")


@dataclass(frozen=True)
class SimilarityGraph:
    """Symmetric sentence-similarity matrix with a binarization threshold."""

    n: int
    weights: np.ndarray
    threshold: float = 0.1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ValidationError(f"weights must be {self.n}x{self.n}")
        object.__setattr__(self, "weights", w)


def sentence_vectors(sentences: list[str]) -> list[dict[str, float]]:
    """Per-sentence TF-IDF vectors over lowercased word tokens.

    IDF is computed over the input sentences only (ln(n / (1 + df)) + 1), so
    each document summarizes independently and reproducibly.
    """
    n = len(sentences)
    token_lists = [[t.lower() for t in _TERM_RE.findall(s)] for s in sentences]
    df: dict[str, int] = {}
    for tokens in token_lists:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    idf = {term: math.log(n / (1 + count)) + 1.0 for term, count in df.items()}
    vectors: list[dict[str, float]] = []
    for tokens in token_lists:
        tf: dict[str, int] = {}
        for term in tokens:
            tf[term] = tf.get(term, 0) + 1
        vectors.append({term: count * idf[term] for term, count in tf.items()})
    return vectors


def cosine(u: dict[str, float], v: dict[str, float]) -> float:
    if len(v) < len(u):
        u, v = v, u
    dot = sum(w * v[t] for t, w in u.items() if t in v)
    nu = math.sqrt(sum(w * w for w in u.values()))
    nv = math.sqrt(sum(w * w for w in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def similarity_graph(sentences: list[str], threshold: float = 0.1) -> SimilarityGraph:
    vectors = sentence_vectors(sentences)
    n = len(sentences)
    weights = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            sim = min(1.0, max(0.0, cosine(vectors[i], vectors[j])))
            weights[i, j] = weights[j, i] = sim
    return SimilarityGraph(n=n, weights=weights, threshold=threshold)


def lexrank_scores(graph: SimilarityGraph, config: CentralityConfig | None = None) -> np.ndarray:
    """Stationary sentence scores (non-negative, summing to 1).

    Edges are the off-diagonal similarities above the graph threshold; rows
    without any edge distribute uniformly.  Power iteration stops when the L1
    change drops below epsilon or after max_iterations.
    """
    config = config or CentralityConfig()
    n = graph.n
    if n < 1:
        raise ValidationError("graph must contain at least one sentence")
    if not np.all(np.isfinite(graph.weights)):
        raise ValidationError("similarity weights must be finite")
    if n == 1:
        return np.array([1.0])

    adjacency = (graph.weights > graph.threshold).astype(float)
    np.fill_diagonal(adjacency, 0.0)
    degrees = adjacency.sum(axis=1)
    transition = np.full((n, n), 1.0 / n)
    connected = degrees > 0
    transition[connected] = adjacency[connected] / degrees[connected, None]

    scores = np.full(n, 1.0 / n)
    jump = (1.0 - config.damping) / n
    for _ in range(config.max_iterations):
        updated = config.damping * (transition.T @ scores) + jump
        if np.abs(updated - scores).sum() < config.epsilon:
            scores = updated
            break
        scores = updated
    return scores


def rank_sentences(scores: np.ndarray) -> list[int]:
    """Sentence indices from highest to lowest score; position breaks ties."""
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def summarize_budget(
    text: str,
    language: str,
    counter: TokenCounterConfig,
    summary_config: SummaryConfig | None = None,
    centrality: CentralityConfig | None = None,
    threshold: float = 0.1,
    doc_id: str = "doc",
    label: int = 0,
) -> AnalysisUnit:
    """Extract a budget-respecting summary of ``text`` as a single unit.

    Empty input yields an empty summary unit (word_count 0).  A summary whose
    sole remaining sentence still exceeds the budget is emitted anyway; the
    caller's manifest records such overflows via ``token_count > budget``.
    """
    summary_config = summary_config or SummaryConfig()
    sentences = split_sentences(text, language)
    uid = unit_id_of(doc_id, 0)

    def unit(body: str, words: int) -> AnalysisUnit:
        return AnalysisUnit(
            unit_id=uid,
            doc_id=doc_id,
            index=0,
            kind="summary",
            text=body,
            label=label,
            token_count=count_tokens(body, counter, key=uid) if body else 0,
            word_count=words,
        )

    if not sentences:
        return unit("", 0)

    scores = lexrank_scores(similarity_graph(sentences, threshold=threshold), centrality)
    ranking = rank_sentences(scores)
    selected = ranking[: min(len(sentences), summary_config.max_sentences)]

    while True:
        ordered = sorted(selected)
        body = " ".join(sentences[i] for i in ordered)
        tokens = count_tokens(body, counter, key=uid)
        if tokens <= summary_config.budget_tokens or len(selected) <= 1:
            return unit(body, len(body.split()))
        selected = selected[:-1]  # drop the most recently added (lowest-ranked) sentence
