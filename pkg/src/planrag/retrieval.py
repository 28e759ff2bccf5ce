"""Retrieval primitives shared by every ranking stage.

Provides tokenization, an inverted index with BM25 scoring (including
per-term saturation overrides), deterministic hashed TF-IDF embeddings as a
stand-in for a neural encoder, loading of externally precomputed embedding
files, and exhaustive top-K cosine search. All ranking operations return a
:class:`RankedList`, the interchange type consumed by fusion and the
pipeline.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigurationError, IndexBuildError, ParseError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# FNV-1a 64-bit constants; the offset basis doubles as the fixed hash seed so
# embedding buckets are identical across platforms and processes.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters (Unicode-aware)."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RankedList:
    """An ordered, scored list of item ids.

    Invariants: scores are finite and non-increasing, ids are distinct, and
    equal scores are ordered by ascending id.
    """

    entries: tuple[tuple[str, float], ...] = ()

    @classmethod
    def from_scores(cls, scores: Mapping[str, float] | Iterable[tuple[str, float]],
                    k: int | None = None) -> "RankedList":
        pairs = list(scores.items()) if isinstance(scores, Mapping) else list(scores)
        seen: set[str] = set()
        for item_id, score in pairs:
            if item_id in seen:
                raise ValueError(f"duplicate item id {item_id!r} in ranked list")
            seen.add(item_id)
            if not math.isfinite(score):
                raise ValueError(f"non-finite score for item {item_id!r}")
        pairs.sort(key=lambda e: (-e[1], e[0]))
        if k is not None:
            if k < 1:
                raise ValueError("k must be >= 1")
            pairs = pairs[:k]
        return cls(tuple((i, float(s)) for i, s in pairs))

    def ids(self) -> list[str]:
        return [item_id for item_id, _ in self.entries]

    def top(self, k: int) -> "RankedList":
        return RankedList(self.entries[:k])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)


@dataclass(frozen=True)
class Bm25Params:
    """BM25 parameters with optional per-term k1 overrides.

    The per-term overrides are the tunable-saturation mechanism: terms listed
    in ``per_term_k1`` use their own k1, all others fall back to the global
    default.
    """

    k1: float = 1.2
    b: float = 0.75
    per_term_k1: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.k1 <= 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")
        if self.per_term_k1:
            for term, value in self.per_term_k1.items():
                if value <= 0:
                    raise ValueError(f"per-term k1 for {term!r} must be positive")

    def k1_for(self, term: str) -> float:
        if self.per_term_k1:
            return self.per_term_k1.get(term, self.k1)
        return self.k1


class InvertedIndex:
    """Immutable inverted index over (id, text) documents.

    Exposes the statistics BM25 and the TF-IDF embedder need: document
    frequency, term frequency, document length, and average document length.
    """

    def __init__(self, docs: Iterable[tuple[str, str]]):
        postings: dict[str, dict[str, int]] = {}
        doc_lengths: dict[str, int] = {}
        for doc_id, text in docs:
            if doc_id in doc_lengths:
                raise IndexBuildError(f"duplicate document id {doc_id!r}")
            terms = tokenize(text)
            doc_lengths[doc_id] = len(terms)
            for term, tf in Counter(terms).items():
                postings.setdefault(term, {})[doc_id] = tf
        self._postings = postings
        self._doc_lengths = doc_lengths
        self._n_docs = len(doc_lengths)
        total = sum(doc_lengths.values())
        self._avg_len = (total / self._n_docs) if self._n_docs else 0.0

    @property
    def n_docs(self) -> int:
        return self._n_docs

    @property
    def avg_doc_length(self) -> float:
        return self._avg_len

    def doc_ids(self) -> list[str]:
        return list(self._doc_lengths)

    def doc_length(self, doc_id: str) -> int:
        return self._doc_lengths[doc_id]

    def document_frequency(self, term: str) -> int:
        return len(self._postings.get(term, ()))

    def term_frequency(self, term: str, doc_id: str) -> int:
        return self._postings.get(term, {}).get(doc_id, 0)

    def postings(self, term: str) -> Mapping[str, int]:
        return self._postings.get(term, {})

    def idf(self, term: str) -> float:
        """Smoothed idf: ln(1 + (N - df + 0.5) / (df + 0.5)), never negative."""
        df = self.document_frequency(term)
        return math.log(1.0 + (self._n_docs - df + 0.5) / (df + 0.5))


def build_index(docs: Iterable[tuple[str, str]]) -> InvertedIndex:
    return InvertedIndex(docs)


def _bm25_term_weight(index: InvertedIndex, term: str, tf: int,
                      doc_len: int, params: Bm25Params) -> float:
    k1 = params.k1_for(term)
    if index.avg_doc_length > 0:
        norm = 1.0 - params.b + params.b * doc_len / index.avg_doc_length
    else:
        norm = 1.0
    return index.idf(term) * tf * (k1 + 1.0) / (tf + k1 * norm)


def bm25_score(index: InvertedIndex, doc_id: str, query_terms: Iterable[str],
               params: Bm25Params | None = None) -> float:
    """BM25 score of one document; unknown terms contribute zero."""
    params = params or Bm25Params()
    score = 0.0
    for term in sorted(set(query_terms)):
        tf = index.term_frequency(term, doc_id)
        if tf:
            score += _bm25_term_weight(index, term, tf, index.doc_length(doc_id), params)
    return score


def bm25_topk(index: InvertedIndex, query_terms: Iterable[str],
              params: Bm25Params | None = None, k: int = 10) -> RankedList:
    """Top-k documents by BM25; zero-score documents are omitted."""
    if k < 1:
        raise ValueError("k must be >= 1")
    params = params or Bm25Params()
    scores: dict[str, float] = {}
    for term in sorted(set(query_terms)):
        for doc_id, tf in index.postings(term).items():
            weight = _bm25_term_weight(index, term, tf, index.doc_length(doc_id), params)
            scores[doc_id] = scores.get(doc_id, 0.0) + weight
    scores = {d: s for d, s in scores.items() if s > 0.0}
    return RankedList.from_scores(scores, k=k)


@lru_cache(maxsize=None)
def _hash64(term: str) -> int:
    h = _FNV_OFFSET
    for byte in term.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


class Embedding:
    """A unit-norm dense vector; all-zero vectors keep norm 0 and are flagged."""

    __slots__ = ("values",)

    def __init__(self, values, normalize: bool = True):
        vec = np.asarray(values, dtype=np.float64)
        if vec.ndim != 1:
            raise ValueError("embedding values must be a 1-D vector")
        if not np.all(np.isfinite(vec)):
            raise ValueError("embedding contains non-finite values")
        if normalize:
            norm = float(np.linalg.norm(vec))
            if norm > 0.0:
                vec = vec / norm
        self.values = vec

    @property
    def dims(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_zero(self) -> bool:
        return not bool(np.any(self.values))

    def dot(self, other: "Embedding") -> float:
        return float(self.values @ other.values)

    def __eq__(self, other) -> bool:
        return isinstance(other, Embedding) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"Embedding(dims={self.dims}, is_zero={self.is_zero})"


def _check_dims(dims: int) -> None:
    if dims < 16 or dims & (dims - 1):
        raise ConfigurationError(f"dims must be a power of two >= 16, got {dims}")


def embed_hashed_tfidf(text: str, dims: int, idf_source: InvertedIndex) -> Embedding:
    """Deterministic hashed TF-IDF embedding.

    Each term hashes to a bucket and a sign via a fixed 64-bit hash; the
    bucket accumulates sign * tf * idf. Terms absent from the idf source are
    skipped, so a text with no indexed terms embeds to the flagged zero
    vector.
    """
    _check_dims(dims)
    vec = np.zeros(dims, dtype=np.float64)
    for term, tf in Counter(tokenize(text)).items():
        if idf_source.document_frequency(term) == 0:
            continue
        h = _hash64(term)
        bucket = h & (dims - 1)
        sign = 1.0 if (h >> 63) == 0 else -1.0
        vec[bucket] += sign * tf * idf_source.idf(term)
    return Embedding(vec)


def load_embeddings(path) -> dict[str, Embedding]:
    """Load ``id<TAB>v1,v2,...,vD`` records; vectors are L2-normalized."""
    out: dict[str, Embedding] = {}
    dims: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected 'id<TAB>values'", path=str(path), line=lineno)
            rec_id, values_part = parts
            try:
                values = [float(v) for v in values_part.split(",")]
            except ValueError as exc:
                raise ParseError(f"bad float: {exc}", path=str(path), line=lineno) from exc
            if dims is None:
                dims = len(values)
            elif len(values) != dims:
                raise ParseError(
                    f"expected {dims} values, got {len(values)}",
                    path=str(path), line=lineno)
            if rec_id in out:
                raise ParseError(f"duplicate id {rec_id!r}", path=str(path), line=lineno)
            out[rec_id] = Embedding(values)
    return out


def cosine_topk(query: Embedding, candidates: Mapping[str, Embedding], k: int) -> RankedList:
    """Top-k candidates by dot product (vectors are pre-normalized)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    for cand_id, emb in candidates.items():
        if emb.dims != query.dims:
            raise ValueError(
                f"candidate {cand_id!r} has dims {emb.dims}, query has {query.dims}")
        scores[cand_id] = query.dot(emb)
    return RankedList.from_scores(scores, k=k)


class HashedTfidfEmbedder(BaseEstimator, TransformerMixin):
    """Sklearn-style wrapper around the hashed TF-IDF embedding.

    ``fit`` builds the inverted index used as the idf source; ``transform``
    maps texts to unit-norm rows of shape (n_texts, dims).
    """

    def __init__(self, dims: int = 1024):
        self.dims = dims

    def fit(self, X: Iterable[str], y=None) -> "HashedTfidfEmbedder":
        _check_dims(self.dims)
        self.index_ = build_index((f"doc-{i}", text) for i, text in enumerate(X))
        return self

    @classmethod
    def from_index(cls, index: InvertedIndex, dims: int = 1024) -> "HashedTfidfEmbedder":
        _check_dims(dims)
        embedder = cls(dims=dims)
        embedder.index_ = index
        return embedder

    def embed(self, text: str) -> Embedding:
        self._check_fitted()
        return embed_hashed_tfidf(text, self.dims, self.index_)

    def transform(self, X: Iterable[str]) -> np.ndarray:
        self._check_fitted()
        rows = [self.embed(text).values for text in X]
        if not rows:
            return np.zeros((0, self.dims), dtype=np.float64)
        return np.vstack(rows)

    def _check_fitted(self) -> None:
        if not hasattr(self, "index_"):
            raise ConfigurationError(
                "HashedTfidfEmbedder is not fitted; call fit() or from_index()")
