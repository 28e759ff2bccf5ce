"""Assemble ranker training groups from a corpus.

For each query of the chosen split, the candidate set is every item the
query's persona owns, featurized against the prebuilt artifacts; relevance
is binary on the gold context ids.
"""
from __future__ import annotations

import numpy as np

from .corpus.model import ContextItem, Corpus
from .fusion import RetrievalArtifacts, feature_matrix
from .ltr import QueryGroup


def build_training_groups(corpus: Corpus, artifacts: RetrievalArtifacts,
                          split: str = "train",
                          max_queries: int | None = None) -> list[QueryGroup]:
    items_by_persona: dict[str, list[ContextItem]] = {}
    for store in corpus.stores:
        items_by_persona.setdefault(store.persona_id, []).extend(store.items)
    personas = corpus.persona_by_id()

    queries = corpus.queries_for_split(split)
    if max_queries is not None:
        queries = queries[:max_queries]

    groups: list[QueryGroup] = []
    for query in queries:
        items = items_by_persona.get(query.persona_id, [])
        if len(items) < 2:
            continue
        persona = personas[query.persona_id]
        X = feature_matrix(query, items, persona, artifacts)
        gold = set(query.gold_context_ids)
        relevance = np.array([1 if item.id in gold else 0 for item in items],
                             dtype=np.int64)
        groups.append(QueryGroup(query_id=query.id,
                                 item_ids=[item.id for item in items],
                                 X=X, relevance=relevance))
    return groups
