"""Federated context retrieval and reciprocal rank fusion.

``fuse-stores`` runs one retrieval backend inside each of a persona's
per-application stores and fuses the per-store lists with RRF; this is the
default reading of fusing ranked data across context stores. ``fuse-rankers``
pools all of a persona's items and fuses one pooled ranking per available
backend (bm25, semantic, and the trained ranker when present), which is how
the learned ``ltr-rrf`` retrieval mode is wired by the pipeline. The
``oracle`` backend returns gold ids at ranks 1..n for upper-bound runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus.model import (APPS, ContextItem, ContextStore, Corpus,
                           LabeledQuery, Persona, item_text)
from .errors import ConfigurationError
from .ltr import N_FEATURES, LtrModel
from .retrieval import (Bm25Params, Embedding, InvertedIndex, RankedList,
                        bm25_score, build_index, embed_hashed_tfidf, tokenize)

FUSION_MODES = ("fuse-stores", "fuse-rankers")
BACKENDS = ("bm25", "semantic", "ltr", "oracle")

DEFAULT_RRF_K = 60.0


@dataclass(frozen=True)
class FusionConfig:
    rrf_k: float = DEFAULT_RRF_K
    mode: str = "fuse-stores"
    backend: str = "bm25"

    def __post_init__(self):
        if self.rrf_k <= 0:
            raise ConfigurationError(f"rrf_k must be positive, got {self.rrf_k}")
        if self.mode not in FUSION_MODES:
            raise ConfigurationError(f"unknown fusion mode {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ConfigurationError(f"unknown backend {self.backend!r}")


def rrf_fuse(lists: Sequence[RankedList], rrf_k: float = DEFAULT_RRF_K,
             k: int | None = None) -> RankedList:
    """Fuse ranked lists: score(d) = sum over lists of 1 / (rrf_k + rank(d)),
    with 1-based ranks; items absent from a list get no contribution.

    Per-item contributions are combined with an exact float sum, so the
    result is bit-identical no matter how the input lists are ordered.
    """
    if rrf_k <= 0:
        raise ConfigurationError(f"rrf_k must be positive, got {rrf_k}")
    contributions: dict[str, list[float]] = {}
    for ranked in lists:
        for rank_pos, (item_id, _) in enumerate(ranked, start=1):
            contributions.setdefault(item_id, []).append(1.0 / (rrf_k + rank_pos))
    scores = {item_id: math.fsum(sorted(parts))
              for item_id, parts in contributions.items()}
    return RankedList.from_scores(scores, k=k)


class _PersonaEmbedder:
    """Embeds text with one persona's pooled-index idf statistics."""

    def __init__(self, index: InvertedIndex, dims: int):
        self.index = index
        self.dims = dims

    def embed(self, text: str) -> Embedding:
        return embed_hashed_tfidf(text, self.dims, self.index)


@dataclass
class RetrievalArtifacts:
    """Prebuilt per-persona indexes and embeddings shared by retrieval stages.

    ``query_vector`` maps a query to its unit vector; the default embeds the
    query text against the persona's idf statistics, and the precomputed
    variant looks vectors up by query id (the hook for externally trained
    encoders).
    """

    persona_index: dict[str, InvertedIndex]
    item_vectors: dict[str, np.ndarray]
    personas: dict[str, Persona]
    dims: int
    query_vector: Callable[[LabeledQuery], np.ndarray]
    bm25_params: Bm25Params = field(default_factory=Bm25Params)
    ltr_model: LtrModel | None = None

    def embedder_for(self, persona_id: str) -> _PersonaEmbedder:
        return _PersonaEmbedder(self.persona_index[persona_id], self.dims)


def build_artifacts(corpus: Corpus, dims: int = 1024,
                    bm25_params: Bm25Params | None = None,
                    ltr_model: LtrModel | None = None) -> RetrievalArtifacts:
    """Index every persona's pooled items and embed them with hashed TF-IDF."""
    persona_index: dict[str, InvertedIndex] = {}
    item_vectors: dict[str, np.ndarray] = {}
    items_by_persona: dict[str, list[ContextItem]] = {}
    for store in corpus.stores:
        items_by_persona.setdefault(store.persona_id, []).extend(store.items)
    for persona in corpus.personas:
        items = items_by_persona.get(persona.id, [])
        index = build_index((item.id, item_text(item)) for item in items)
        persona_index[persona.id] = index
        for item in items:
            item_vectors[item.id] = embed_hashed_tfidf(
                item_text(item), dims, index).values

    def query_vector(query: LabeledQuery) -> np.ndarray:
        return embed_hashed_tfidf(query.text, dims,
                                  persona_index[query.persona_id]).values

    return RetrievalArtifacts(
        persona_index=persona_index, item_vectors=item_vectors,
        personas=corpus.persona_by_id(), dims=dims, query_vector=query_vector,
        bm25_params=bm25_params or Bm25Params(), ltr_model=ltr_model)


def artifacts_with_precomputed(corpus: Corpus,
                               item_embeddings: dict[str, Embedding],
                               query_embeddings: dict[str, Embedding],
                               bm25_params: Bm25Params | None = None,
                               ltr_model: LtrModel | None = None) -> RetrievalArtifacts:
    """Artifacts backed by externally supplied embedding files."""
    if not item_embeddings:
        raise ConfigurationError("item embedding map is empty")
    dims = next(iter(item_embeddings.values())).dims
    persona_index = {}
    items_by_persona: dict[str, list[ContextItem]] = {}
    for store in corpus.stores:
        items_by_persona.setdefault(store.persona_id, []).extend(store.items)
    for persona in corpus.personas:
        items = items_by_persona.get(persona.id, [])
        persona_index[persona.id] = build_index(
            (item.id, item_text(item)) for item in items)
        for item in items:
            if item.id not in item_embeddings:
                raise ConfigurationError(f"no embedding for item {item.id!r}")

    def query_vector(query: LabeledQuery) -> np.ndarray:
        try:
            return query_embeddings[query.id].values
        except KeyError:
            raise ConfigurationError(f"no embedding for query {query.id!r}") from None

    return RetrievalArtifacts(
        persona_index=persona_index,
        item_vectors={i: e.values for i, e in item_embeddings.items()},
        personas=corpus.persona_by_id(), dims=dims, query_vector=query_vector,
        bm25_params=bm25_params or Bm25Params(), ltr_model=ltr_model)


def feature_matrix(query: LabeledQuery, items: Sequence[ContextItem],
                   persona: Persona, artifacts: RetrievalArtifacts) -> np.ndarray:
    """Stacked ranking features for one query's candidate items.

    Matches ``ltr.extract_features`` row for row but reuses the cached item
    vectors, which matters when featurizing the whole training split.
    """
    index = artifacts.persona_index[persona.id]
    terms = tokenize(query.text)
    qv = artifacts.query_vector(query)
    X = np.zeros((len(items), N_FEATURES), dtype=np.float64)
    for i, item in enumerate(items):
        X[i, 0] = bm25_score(index, item.id, terms, artifacts.bm25_params)
        X[i, 1] = float(qv @ artifacts.item_vectors[item.id])
        X[i, 2] = np.log1p(item.access_count)
        X[i, 3] = max(0.0, (query.timestamp - item.timestamp).total_seconds() / 86400.0)
        X[i, 4] = 1.0 if abs(query.timestamp.hour - item.timestamp.hour) <= 2 else 0.0
        X[i, 5] = persona.app_usage_profile.get(item.app, 0.0)
        X[i, 6 + APPS.index(item.app)] = 1.0
    return X


def _rank_items_bm25(artifacts: RetrievalArtifacts, query: LabeledQuery,
                     items: Sequence[ContextItem], k: int | None) -> RankedList:
    index = artifacts.persona_index[query.persona_id]
    terms = tokenize(query.text)
    scores = {}
    for item in items:
        s = bm25_score(index, item.id, terms, artifacts.bm25_params)
        if s > 0.0:
            scores[item.id] = s
    return RankedList.from_scores(scores, k=k)


def _rank_items_semantic(artifacts: RetrievalArtifacts, query: LabeledQuery,
                         items: Sequence[ContextItem], k: int | None) -> RankedList:
    # Non-positive cosines are dropped for parity with BM25's zero-score
    # omission, so empty stores contribute nothing to the fusion.
    qv = artifacts.query_vector(query)
    scores = {}
    for item in items:
        s = float(qv @ artifacts.item_vectors[item.id])
        if s > 0.0:
            scores[item.id] = s
    return RankedList.from_scores(scores, k=k)


def _rank_items_ltr(artifacts: RetrievalArtifacts, query: LabeledQuery,
                    items: Sequence[ContextItem], k: int | None) -> RankedList:
    persona = artifacts.personas[query.persona_id]
    X = feature_matrix(query, items, persona, artifacts)
    scores = artifacts.ltr_model.predict(X)
    return RankedList.from_scores(
        zip((item.id for item in items), scores.tolist()), k=k)


def _oracle_list(query: LabeledQuery, k: int | None) -> RankedList:
    entries = tuple((gid, 1.0 / (rank + 1))
                    for rank, gid in enumerate(query.gold_context_ids))
    ranked = RankedList(entries)
    return ranked.top(k) if k is not None else ranked


def federated_retrieve(query: LabeledQuery, persona_stores: Sequence[ContextStore],
                       cfg: FusionConfig, artifacts: RetrievalArtifacts,
                       k: int) -> RankedList:
    """Retrieve context for one query across its persona's stores."""
    for store in persona_stores:
        if store.persona_id != query.persona_id:
            raise ConfigurationError(
                f"store for persona {store.persona_id!r} passed with query "
                f"for {query.persona_id!r}")
    if cfg.backend == "ltr" and artifacts.ltr_model is None:
        raise ConfigurationError("backend 'ltr' requires a trained model")

    if cfg.backend == "oracle":
        return _oracle_list(query, k)

    rankers = {"bm25": _rank_items_bm25, "semantic": _rank_items_semantic,
               "ltr": _rank_items_ltr}

    if cfg.mode == "fuse-stores":
        backend = rankers[cfg.backend]
        lists = [backend(artifacts, query, store.items, k)
                 for store in persona_stores if store.items]
        return rrf_fuse(lists, cfg.rrf_k, k)

    # fuse-rankers: one pooled ranking per available backend.
    pool = [item for store in persona_stores for item in store.items]
    names = ["bm25", "semantic"] + (["ltr"] if artifacts.ltr_model is not None else [])
    lists = [rankers[name](artifacts, query, pool, None) for name in names]
    return rrf_fuse(lists, cfg.rrf_k, k)


# --------------------------------------------------------------------------
# Query augmentation hook
# --------------------------------------------------------------------------

QueryAugmenter = Callable[[str], str]


def identity_augmenter(query_text: str) -> str:
    return ""


def hint_augmenter(persona: Persona) -> QueryAugmenter:
    """Deterministic stand-in for generated reasoning text: hints the
    persona's top two habitual apps."""
    apps = persona.top_apps(2)

    def augment(query_text: str) -> str:
        return f"[hint: {' '.join(apps)}]"

    return augment


def augment_query(query_text: str, augmenter: QueryAugmenter) -> str:
    suffix = augmenter(query_text)
    if not suffix:
        return query_text
    return f"{query_text} {suffix}"
