"""Retrieval primitives: tokenization, BM25, hashed embeddings, cosine."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planrag.errors import ConfigurationError, IndexBuildError, ParseError
from planrag.retrieval import (Bm25Params, Embedding, HashedTfidfEmbedder,
                               RankedList, bm25_score, bm25_topk, build_index,
                               cosine_topk, embed_hashed_tfidf,
                               load_embeddings, tokenize)


class TestTokenize:
    def test_basic(self):
        assert tokenize("Guitar Class!") == ["guitar", "class"]

    def test_empty(self):
        assert tokenize("") == []

    def test_alnum_mix(self):
        assert tokenize("LLM Discussion 2023") == ["llm", "discussion", "2023"]

    def test_underscore_splits(self):
        assert tokenize("search_web") == ["search", "web"]


class TestRankedList:
    def test_sorted_and_tiebroken(self):
        rl = RankedList.from_scores({"b": 1.0, "a": 1.0, "c": 2.0})
        assert rl.ids() == ["c", "a", "b"]

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            RankedList.from_scores([("a", 1.0), ("a", 2.0)])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            RankedList.from_scores({"a": float("nan")})

    def test_truncation(self):
        rl = RankedList.from_scores({"a": 3.0, "b": 2.0, "c": 1.0}, k=2)
        assert rl.ids() == ["a", "b"]

    @given(st.dictionaries(st.text(min_size=1, max_size=4),
                           st.floats(-100, 100), max_size=20))
    def test_invariants_hold(self, scores):
        rl = RankedList.from_scores(scores)
        entries = list(rl)
        for i in range(1, len(entries)):
            prev_id, prev_s = entries[i - 1]
            cur_id, cur_s = entries[i]
            assert prev_s > cur_s or (prev_s == cur_s and prev_id < cur_id)
        assert len({i for i, _ in entries}) == len(entries)


class TestInvertedIndex:
    def test_document_frequency(self):
        idx = build_index([("a", "x y"), ("b", "x"), ("c", "z")])
        assert idx.document_frequency("x") == 2

    def test_avg_doc_length(self):
        idx = build_index([("a", "x y"), ("b", "x y z w")])
        assert idx.avg_doc_length == 3.0

    def test_empty_index_scores_nothing(self):
        idx = build_index([])
        assert len(bm25_topk(idx, ["x"], k=5)) == 0

    def test_duplicate_id_rejected(self):
        with pytest.raises(IndexBuildError):
            build_index([("a", "x"), ("a", "y")])


def _bm25_oracle(docs, query_terms, doc_id, k1=1.2, b=0.75):
    """Direct formula evaluation, independent of the index implementation."""
    token_lists = {d: t.lower().split() for d, t in docs}
    n = len(docs)
    avg_len = sum(len(t) for t in token_lists.values()) / n
    score = 0.0
    for term in sorted(set(query_terms)):
        df = sum(1 for toks in token_lists.values() if term in toks)
        tf = token_lists[doc_id].count(term)
        if tf == 0:
            continue
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1 - b + b * len(token_lists[doc_id]) / avg_len))
    return score


class TestBm25:
    def test_single_doc_single_term_collapses_to_idf(self):
        idx = build_index([("d", "guitar")])
        # len == avglen, tf == 1: the saturation factor cancels to 1.
        expected = math.log(1.0 + (1 - 1 + 0.5) / 1.5)
        assert bm25_score(idx, "d", ["guitar"]) == pytest.approx(expected, abs=1e-12)

    def test_unknown_terms_score_zero(self):
        idx = build_index([("d", "guitar class")])
        assert len(bm25_topk(idx, ["piano"], k=3)) == 0

    def test_toy_corpus_golden(self, toy_docs):
        idx = build_index(toy_docs)
        ranked = bm25_topk(idx, ["guitar", "class"], k=3)
        assert ranked.ids() == ["d1", "d3"]
        for doc_id, score in ranked:
            expected = _bm25_oracle(toy_docs, ["guitar", "class"], doc_id)
            assert score == pytest.approx(expected, abs=1e-9)

    def test_zero_score_docs_omitted(self, toy_docs):
        idx = build_index(toy_docs)
        ranked = bm25_topk(idx, ["milk"], k=10)
        assert ranked.ids() == ["d2"]

    def test_per_term_k1_override_changes_saturation(self):
        idx = build_index([("d", "x x x y")])
        base = bm25_score(idx, "d", ["x"], Bm25Params())
        flat = bm25_score(idx, "d", ["x"], Bm25Params(per_term_k1={"x": 100.0}))
        assert flat > base  # huge k1 keeps tf nearly linear: less saturation

    def test_per_term_k1_only_affects_listed_terms(self):
        idx = build_index([("d", "x x x y y y")])
        params = Bm25Params(per_term_k1={"x": 100.0})
        assert bm25_score(idx, "d", ["y"], params) == bm25_score(idx, "d", ["y"])
        assert bm25_score(idx, "d", ["x"], params) != bm25_score(idx, "d", ["x"])

    def test_params_validation(self):
        with pytest.raises(ValueError):
            Bm25Params(k1=0)
        with pytest.raises(ValueError):
            Bm25Params(b=1.5)
        with pytest.raises(ValueError):
            Bm25Params(per_term_k1={"x": -1.0})

    @given(st.integers(1, 8), st.data())
    @settings(max_examples=60, deadline=None)
    def test_single_term_monotonicity(self, n_docs, data):
        # Adding one more occurrence of the query term to a doc that already
        # contains it never decreases that doc's score for that term.
        vocab = ["a", "b", "c", "d"]
        docs = []
        for i in range(n_docs):
            words = data.draw(st.lists(st.sampled_from(vocab), min_size=1, max_size=10))
            docs.append((f"d{i}", " ".join(words)))
        target = data.draw(st.integers(0, n_docs - 1))
        present = sorted(set(docs[target][1].split()))
        term = data.draw(st.sampled_from(present))
        before = bm25_score(build_index(docs), docs[target][0], [term])
        grown = list(docs)
        grown[target] = (grown[target][0], grown[target][1] + " " + term)
        after = bm25_score(build_index(grown), grown[target][0], [term])
        assert after >= before - 1e-12

    @given(st.lists(st.text(alphabet="abcde ", min_size=1, max_size=20),
                    min_size=1, max_size=6),
           st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=3))
    @settings(max_examples=60, deadline=None)
    def test_topk_satisfies_ranked_list_invariants(self, texts, query):
        docs = [(f"d{i}", t) for i, t in enumerate(texts)]
        ranked = bm25_topk(build_index(docs), query, k=10)
        scores = [s for _, s in ranked]
        assert scores == sorted(scores, reverse=True)
        assert all(s > 0 for s in scores)


class TestHashedTfidfEmbedding:
    def test_deterministic(self, toy_docs):
        idx = build_index(toy_docs)
        a = embed_hashed_tfidf("guitar class", 64, idx)
        b = embed_hashed_tfidf("guitar class", 64, idx)
        assert a == b

    def test_unindexed_terms_give_flagged_zero_vector(self, toy_docs):
        idx = build_index(toy_docs)
        emb = embed_hashed_tfidf("saxophone practice", 64, idx)
        assert emb.is_zero
        assert np.linalg.norm(emb.values) == 0.0

    def test_unit_norm(self, toy_docs):
        idx = build_index(toy_docs)
        emb = embed_hashed_tfidf("guitar class", 64, idx)
        assert np.linalg.norm(emb.values) == pytest.approx(1.0, abs=1e-6)

    def test_related_text_closer_than_unrelated(self):
        docs = [("d1", "guitar class monday"), ("d2", "buy milk"),
                ("d3", "guitar lesson notes"), ("d4", "milk price review")]
        idx = build_index(docs)
        q = embed_hashed_tfidf("guitar class", 64, idx)
        related = embed_hashed_tfidf("guitar lesson", 64, idx)
        unrelated = embed_hashed_tfidf("buy milk", 64, idx)
        assert q.dot(related) > q.dot(unrelated)

    def test_dims_must_be_power_of_two(self, toy_docs):
        idx = build_index(toy_docs)
        with pytest.raises(ConfigurationError):
            embed_hashed_tfidf("x", 48, idx)
        with pytest.raises(ConfigurationError):
            embed_hashed_tfidf("x", 8, idx)

    def test_embedder_transform_shape(self, toy_docs):
        embedder = HashedTfidfEmbedder(dims=32).fit(t for _, t in toy_docs)
        X = embedder.transform(["guitar class", "buy milk"])
        assert X.shape == (2, 32)

    def test_embedder_sklearn_params_roundtrip(self):
        embedder = HashedTfidfEmbedder(dims=64)
        assert embedder.get_params() == {"dims": 64}
        embedder.set_params(dims=128)
        assert embedder.dims == 128


class TestLoadEmbeddings:
    def test_load_and_normalize(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("a\t3,4,0,0\nb\t0,0,0,1\n", encoding="utf-8")
        embs = load_embeddings(path)
        assert len(embs) == 2
        assert np.allclose(embs["a"].values, [0.6, 0.8, 0.0, 0.0])

    def test_ragged_dims_rejected_with_line(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("a\t1,0,0,0\nb\t1,0,0\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_embeddings(path)
        assert err.value.line == 2

    def test_bad_float_rejected(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("a\t1,zzz\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_embeddings(path)


class TestCosineTopk:
    def test_identical_vector_scores_one(self):
        q = Embedding([1.0, 1.0, 0.0, 0.0])
        ranked = cosine_topk(q, {"same": Embedding([1.0, 1.0, 0.0, 0.0]),
                                 "other": Embedding([0.5, 0.0, 1.0, 0.0])}, k=2)
        assert ranked.ids()[0] == "same"
        assert ranked.entries[0][1] == pytest.approx(1.0, abs=1e-6)

    def test_orthogonal_scores_zero(self):
        q = Embedding([1.0, 0.0])
        ranked = cosine_topk(q, {"o": Embedding([0.0, 1.0])}, k=1)
        assert ranked.entries[0][1] == pytest.approx(0.0, abs=1e-12)

    def test_k_larger_than_candidates(self):
        q = Embedding([1.0, 0.0])
        ranked = cosine_topk(q, {"a": Embedding([1.0, 0.0]),
                                 "b": Embedding([0.0, 1.0])}, k=10)
        assert len(ranked) == 2

    def test_mixed_dims_rejected(self):
        q = Embedding([1.0, 0.0])
        with pytest.raises(ValueError):
            cosine_topk(q, {"a": Embedding([1.0, 0.0, 0.0])}, k=1)

    @given(st.integers(2, 12), st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_total_ordering_matches_bruteforce(self, n, seed):
        rng = np.random.default_rng(seed)
        q = Embedding(rng.normal(size=16))
        cands = {f"c{i:02d}": Embedding(rng.normal(size=16)) for i in range(n)}
        ranked = cosine_topk(q, cands, k=n)
        brute = sorted(((cid, q.dot(e)) for cid, e in cands.items()),
                       key=lambda p: (-p[1], p[0]))
        assert ranked.ids() == [cid for cid, _ in brute]
