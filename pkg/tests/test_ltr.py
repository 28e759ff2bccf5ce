"""LambdaMART: features, gradients, trees, training, persistence."""
import math
import random
from datetime import datetime, timezone

import numpy as np
import pytest
from sklearn.base import clone

from planrag.corpus.model import ContextItem, LabeledQuery, Persona, Plan
from planrag.errors import ModelFormatError, ParseError, TrainingError
from planrag.ltr import (FEATURE_SCHEMA, LambdaMartRanker, LtrConfig,
                         N_FEATURES, QueryGroup, extract_features,
                         fit_tree, lambda_gradients, load_model,
                         rank, save_model, train)
from planrag.metrics import RetrievalJudgment, ndcg_at_k
from planrag.retrieval import RankedList, build_index


def _utc(h=9, day=15):
    return datetime(2024, 1, day, h, 0, 0, tzinfo=timezone.utc)


def _query(text="guitar class", ts=None):
    return LabeledQuery(id="q", persona_id="p", text=text,
                        timestamp=ts or _utc(), gold_context_ids=("i1",),
                        gold_tools=("search_events",),
                        gold_plan=Plan("search_events", {}), split="test")


def _item(text="guitar class", ts=None, access=0, app="calendar"):
    return ContextItem(id="i1", app=app, title=text, body="",
                       timestamp=ts or _utc(), categorical_tags={},
                       access_count=access)


def _persona():
    return Persona(id="p", attributes={},
                   app_usage_profile={"calendar": 0.4, "music": 0.6})


class _Embedder:
    def __init__(self, index, dims=64):
        self.index = index
        self.dims = dims

    def embed(self, text):
        from planrag.retrieval import embed_hashed_tfidf
        return embed_hashed_tfidf(text, self.dims, self.index)


class TestExtractFeatures:
    def _setup(self, query, item):
        index = build_index([(item.id, f"{item.title}. {item.body}")])
        return index, _Embedder(index)

    def test_same_timestamp_gives_zero_recency_and_hour_match(self):
        q, it = _query(ts=_utc(14)), _item(ts=_utc(14))
        index, emb = self._setup(q, it)
        vec = extract_features(q, it, _persona(), index, emb)
        schema = dict(zip(FEATURE_SCHEMA, vec))
        assert schema["recency_days"] == 0.0
        assert schema["hour_of_day_match"] == 1.0

    def test_zero_access_count_logs_to_zero(self):
        q, it = _query(), _item(access=0)
        index, emb = self._setup(q, it)
        vec = extract_features(q, it, _persona(), index, emb)
        assert dict(zip(FEATURE_SCHEMA, vec))["access_count_log"] == 0.0

    def test_identical_text_cosine_one(self):
        q, it = _query("guitar class"), _item("guitar class")
        index, emb = self._setup(q, it)
        vec = extract_features(q, it, _persona(), index, emb)
        assert dict(zip(FEATURE_SCHEMA, vec))["cosine_sim"] == pytest.approx(1.0, abs=1e-6)

    def test_app_one_hot_and_usage(self):
        q, it = _query(), _item(app="calendar")
        index, emb = self._setup(q, it)
        schema = dict(zip(FEATURE_SCHEMA, extract_features(q, it, _persona(), index, emb)))
        assert schema["app_is_calendar"] == 1.0
        assert schema["app_is_music"] == 0.0
        assert schema["app_usage_weight"] == pytest.approx(0.4)

    def test_hour_window(self):
        q, it = _query(ts=_utc(15)), _item(ts=_utc(12))
        index, emb = self._setup(q, it)
        assert dict(zip(FEATURE_SCHEMA,
                        extract_features(q, it, _persona(), index, emb)))["hour_of_day_match"] == 0.0


def _group(rel, ids=None):
    rel = np.asarray(rel)
    n = rel.shape[0]
    ids = ids or [f"r{i}" for i in range(n)]
    X = np.zeros((n, N_FEATURES))
    return QueryGroup(query_id="g", item_ids=ids, X=X, relevance=rel)


class TestLambdaGradients:
    def test_two_rows_equal_scores_sigmoid_half(self):
        group = _group([1, 0])
        lam, hess = lambda_gradients(group, np.array([0.5, 0.5]), 1.0, 10)
        # rho = 1/2; winner currently ranked above (tie broken by id).
        assert lam[0] == pytest.approx(-lam[1], abs=1e-12)
        assert lam[0] > 0
        assert np.all(hess >= 0)

    def test_uniform_relevance_gives_zeros(self):
        group = _group([1, 1, 1])
        lam, hess = lambda_gradients(group, np.array([0.3, 0.2, 0.1]), 1.0, 10)
        assert np.all(lam == 0) and np.all(hess == 0)

    def test_three_row_golden_values(self):
        # Frozen from an independent double-loop evaluation of the pairwise
        # formulas (sigma=1, cutoff=3, ranking by (-score, id)).
        group = _group([2, 1, 0])
        lam, hess = lambda_gradients(group, np.array([0.1, 0.2, 0.3]), 1.0, 3)
        assert lam == pytest.approx(
            [0.2650069961600824, 0.015501100439583991, -0.28050809659966636], abs=1e-12)
        assert hess == pytest.approx(
            [0.120238169195239, 0.04333291312803988, 0.12760151452102075], abs=1e-12)

    def test_lambda_sum_zero_and_hessians_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = rng.integers(2, 8)
            group = _group(rng.integers(0, 3, size=n))
            scores = rng.normal(size=n)
            lam, hess = lambda_gradients(group, scores, 1.0, 5)
            assert abs(lam.sum()) < 1e-9
            assert np.all(hess >= 0)

    def test_delta_matches_ndcg_swap_difference(self):
        # |dNDCG| for a pair must equal the change ndcg_at_k reports when the
        # two items swap positions (the metrics module is the oracle here).
        rng = random.Random(5)
        for _ in range(100):
            n = rng.randint(2, 5)
            rel = [rng.randint(0, 2) for _ in range(n)]
            if len(set(rel)) < 2:
                continue
            scores = [rng.uniform(-1, 1) for _ in range(n)]
            ids = [f"r{i}" for i in range(n)]
            cutoff = rng.randint(1, n)
            group = _group(rel, ids)
            order = sorted(range(n), key=lambda i: (-scores[i], ids[i]))
            judgment = RetrievalJudgment(
                "q", frozenset(ids[i] for i in range(n) if rel[i] > 0),
                graded={ids[i]: rel[i] for i in range(n)})

            def perm_ndcg(perm):
                ranked = RankedList(tuple((ids[i], float(n - p))
                                          for p, i in enumerate(perm)))
                return ndcg_at_k(ranked, judgment, cutoff)

            base = perm_ndcg(order)
            i, j = rng.sample(range(n), 2)
            if rel[i] == rel[j]:
                continue
            swapped = order[:]
            pi, pj = swapped.index(i), swapped.index(j)
            swapped[pi], swapped[pj] = swapped[pj], swapped[pi]
            expected_delta = abs(perm_ndcg(swapped) - base)

            # Reach the same quantity through the gradient formula.
            pos = {idx: p + 1 for p, idx in enumerate(order)}
            gains = [2.0 ** r - 1 for r in rel]
            disc = {idx: (1.0 / math.log2(1 + pos[idx]) if pos[idx] <= cutoff else 0.0)
                    for idx in range(n)}
            ideal = sorted(rel, reverse=True)[:cutoff]
            idcg = sum((2.0 ** r - 1) / math.log2(p + 1)
                       for p, r in enumerate(ideal, start=1))
            delta = abs((gains[i] - gains[j]) * (disc[i] - disc[j])) / idcg
            assert delta == pytest.approx(expected_delta, abs=1e-9)


class TestFitTree:
    def test_constant_targets_single_leaf(self):
        X = np.random.default_rng(0).normal(size=(30, 3))
        tree = fit_tree(X, np.full(30, 2.5), np.ones(30), max_leaves=8,
                        min_samples_leaf=1)
        assert tree.n_leaves() == 1
        assert tree.predict(X) == pytest.approx(np.full(30, 2.5), abs=1e-6)

    def test_perfect_split_reproduces_group_means(self):
        X = np.zeros((20, 2))
        X[:10, 0] = 0.0
        X[10:, 0] = 1.0
        targets = np.array([1.0] * 10 + [5.0] * 10)
        tree = fit_tree(X, targets, np.ones(20), max_leaves=4, min_samples_leaf=1)
        assert tree.n_leaves() == 2
        assert tree.predict(X[:1]) == pytest.approx([1.0], abs=1e-6)
        assert tree.predict(X[-1:]) == pytest.approx([5.0], abs=1e-6)

    def test_beats_single_leaf_baseline(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(50, 4))
        targets = X[:, 2] * 3.0 + rng.normal(scale=0.1, size=50)
        tree = fit_tree(X, targets, np.ones(50), max_leaves=8, min_samples_leaf=2)
        baseline = np.mean((targets - targets.mean()) ** 2)
        fitted = np.mean((targets - tree.predict(X)) ** 2)
        assert fitted <= baseline

    def test_min_samples_leaf_respected(self):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        targets = np.array([0.0] * 9 + [100.0])
        tree = fit_tree(X, targets, np.ones(10), max_leaves=8, min_samples_leaf=5)
        # The only legal split is 5/5; no leaf may isolate the outlier.
        assert tree.n_leaves() <= 2

    def test_leaf_values_clipped(self):
        X = np.zeros((4, 1))
        X[2:, 0] = 1.0
        targets = np.array([1000.0, 1000.0, -1000.0, -1000.0])
        tree = fit_tree(X, targets, np.full(4, 1e-12), max_leaves=4,
                        min_samples_leaf=1)
        assert np.all(np.abs(tree.value) <= 10.0)


def _separable_groups(n_groups, group_size, seed):
    rng = np.random.default_rng(seed)
    groups = []
    for g in range(n_groups):
        X = rng.uniform(size=(group_size, N_FEATURES))
        rel = np.zeros(group_size, dtype=np.int64)
        rel[int(np.argmax(X[:, 0]))] = 1
        groups.append(QueryGroup(query_id=f"g{g}",
                                 item_ids=[f"g{g}-r{i}" for i in range(group_size)],
                                 X=X, relevance=rel))
    return groups


class TestTrain:
    def test_no_trainable_pairs_raises(self):
        with pytest.raises(TrainingError):
            train([_group([1, 1])], LtrConfig(n_trees=1))

    def test_zero_trees_gives_base_only_model(self):
        groups = _separable_groups(5, 6, seed=0)
        model, history = train(groups, LtrConfig(n_trees=0))
        assert len(model.trees) == 0 and history == []
        ranked = rank(model, [("b", np.zeros(N_FEATURES)),
                              ("a", np.zeros(N_FEATURES))])
        assert ranked.ids() == ["a", "b"]  # tie-broken by id

    def test_determinism_same_seed_same_serialization(self, tmp_path):
        cfg = LtrConfig(n_trees=5, max_leaves=7, min_samples_leaf=2)
        m1, _ = train(_separable_groups(10, 6, seed=1), cfg)
        m2, _ = train(_separable_groups(10, 6, seed=1), cfg)
        p1, p2 = tmp_path / "m1.txt", tmp_path / "m2.txt"
        save_model(m1, p1)
        save_model(m2, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_learnable_task_improves(self):
        groups = _separable_groups(30, 8, seed=2)
        _, history = train(groups, LtrConfig(n_trees=30, max_leaves=7,
                                             min_samples_leaf=5))
        assert history[-1] > history[0]

    def test_monotone_trend_over_300_rounds(self):
        # Weak base learners (stumps) on wide groups make the learning curve
        # visible: round 300 must beat round 1 by a wide margin.
        groups = _separable_groups(100, 30, seed=9)
        _, history = train(groups, LtrConfig(max_leaves=2))
        assert len(history) == 300
        assert history[-1] - history[0] >= 0.2

    def test_single_leaf_trees_shift_prediction_uniformly(self):
        groups = _separable_groups(5, 6, seed=3)
        model, _ = train(groups, LtrConfig(n_trees=3, max_leaves=1,
                                           min_samples_leaf=1))
        # max_leaves=1 means every tree is a single leaf: prediction is the
        # same constant for any input.
        out = model.predict(np.random.default_rng(0).normal(size=(4, N_FEATURES)))
        assert np.allclose(out, out[0])


class TestPredictAndRank:
    def test_predict_row_order_invariance(self):
        model, _ = train(_separable_groups(10, 6, seed=4),
                         LtrConfig(n_trees=5, max_leaves=7, min_samples_leaf=2))
        X = np.random.default_rng(1).uniform(size=(10, N_FEATURES))
        perm = np.random.default_rng(2).permutation(10)
        assert np.allclose(model.predict(X)[perm], model.predict(X[perm]))

    def test_rank_satisfies_ranked_list_invariants(self):
        model, _ = train(_separable_groups(10, 6, seed=5),
                         LtrConfig(n_trees=5, max_leaves=7, min_samples_leaf=2))
        rng = np.random.default_rng(3)
        cands = [(f"c{i}", rng.uniform(size=N_FEATURES)) for i in range(8)]
        ranked = rank(model, cands)
        scores = [s for _, s in ranked]
        assert scores == sorted(scores, reverse=True)
        assert len(ranked) == 8


class TestPersistence:
    def _model(self):
        model, _ = train(_separable_groups(8, 6, seed=6),
                         LtrConfig(n_trees=4, max_leaves=7, min_samples_leaf=2))
        return model

    def test_round_trip_identity(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.txt"
        save_model(model, path)
        loaded = load_model(path)
        X = np.random.default_rng(0).uniform(size=(6, N_FEATURES))
        assert np.array_equal(model.predict(X), loaded.predict(X))
        assert loaded.feature_schema == FEATURE_SCHEMA
        assert loaded.learning_rate == model.learning_rate

    def test_schema_hash_mismatch_rejected(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.txt"
        save_model(model, path)
        lines = path.read_text().splitlines()
        header = lines[0].replace("bm25_score", "bogus_feature")
        path.write_text("\n".join([header] + lines[1:]) + "\n")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_corrupted_tree_record_rejected(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.txt"
        save_model(model, path)
        lines = path.read_text().splitlines()
        lines[1] = "{not json"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError):
            load_model(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text("")
        with pytest.raises(ParseError):
            load_model(path)


class TestSklearnEstimator:
    def _fit_data(self):
        groups = _separable_groups(10, 6, seed=7)
        X = np.vstack([g.X for g in groups])
        y = np.concatenate([g.relevance for g in groups])
        sizes = [g.X.shape[0] for g in groups]
        return X, y, sizes

    def test_fit_predict(self):
        X, y, sizes = self._fit_data()
        ranker = LambdaMartRanker(n_trees=5, max_leaves=7, min_samples_leaf=2)
        ranker.fit(X, y, group=sizes)
        assert ranker.predict(X).shape == (X.shape[0],)
        assert len(ranker.train_ndcg_) == 5

    def test_get_params_and_clone(self):
        ranker = LambdaMartRanker(n_trees=12, learning_rate=0.2)
        params = ranker.get_params()
        assert params["n_trees"] == 12 and params["learning_rate"] == 0.2
        cloned = clone(ranker)
        assert cloned.get_params() == params

    def test_bad_group_sizes_rejected(self):
        X, y, sizes = self._fit_data()
        with pytest.raises(ValueError):
            LambdaMartRanker(n_trees=1).fit(X, y, group=[3, 3])

    def test_predict_before_fit_raises(self):
        with pytest.raises(TrainingError):
            LambdaMartRanker().predict(np.zeros((1, N_FEATURES)))
