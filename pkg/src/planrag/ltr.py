"""Learning-to-rank: feature extraction and a from-scratch LambdaMART.

The trainer boosts regression trees on LambdaRank gradients. Each round it
scores every group, forms pairwise gradients weighted by the NDCG change a
swap would cause, fits a tree to those gradients, and takes a shrunken
Newton step per leaf. Rank discounts are truncated at the NDCG cutoff, so
the pairwise |delta NDCG| equals the exact swap difference of truncated
NDCG.

``LambdaMartRanker`` wraps the functional trainer in a scikit-learn style
estimator (``fit(X, y, group=...)`` / ``predict``) so it composes with the
surrounding ecosystem; the underlying :class:`LtrModel` is the immutable
artifact that gets serialized.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .corpus.model import APPS, ContextItem, LabeledQuery, Persona, item_text
from .errors import ModelFormatError, ParseError, TrainingError
from .retrieval import Bm25Params, InvertedIndex, RankedList, bm25_score, tokenize
from .validation import check_feature_matrix, check_group_sizes, check_targets

FEATURE_SCHEMA: tuple[str, ...] = (
    "bm25_score",
    "cosine_sim",
    "access_count_log",
    "recency_days",
    "hour_of_day_match",
    "app_usage_weight",
) + tuple(f"app_is_{app}" for app in APPS)

N_FEATURES = len(FEATURE_SCHEMA)

_LEAF_CLIP = 10.0
_HESS_EPS = 1e-9
MODEL_FORMAT_VERSION = 1


def extract_features(query: LabeledQuery, item: ContextItem, persona: Persona,
                     index: InvertedIndex, embedder,
                     bm25_params: Bm25Params | None = None) -> np.ndarray:
    """Feature vector for one (query, item) pair in FEATURE_SCHEMA order.

    ``index`` is the persona's pooled item index and ``embedder`` anything
    with an ``embed(text) -> Embedding`` method.
    """
    bm25 = bm25_score(index, item.id, tokenize(query.text), bm25_params)
    q_emb = embedder.embed(query.text)
    i_emb = embedder.embed(item_text(item))
    cosine = q_emb.dot(i_emb)
    access_log = math.log1p(item.access_count)
    recency = max(0.0, (query.timestamp - item.timestamp).total_seconds() / 86400.0)
    hour_match = 1.0 if abs(query.timestamp.hour - item.timestamp.hour) <= 2 else 0.0
    usage = persona.app_usage_profile.get(item.app, 0.0)
    vec = np.zeros(N_FEATURES, dtype=np.float64)
    vec[0:6] = (bm25, cosine, access_log, recency, hour_match, usage)
    vec[6 + APPS.index(item.app)] = 1.0
    return vec


@dataclass
class QueryGroup:
    """Feature rows of one query's candidate items with their relevance."""

    query_id: str
    item_ids: list[str]
    X: np.ndarray
    relevance: np.ndarray

    def __post_init__(self):
        self.X = check_feature_matrix(self.X)
        self.relevance = np.asarray(self.relevance, dtype=np.int64).ravel()
        if len(self.item_ids) != self.X.shape[0] or self.relevance.shape[0] != self.X.shape[0]:
            raise ValueError("item_ids, X, and relevance must be aligned")
        if np.any(self.relevance < 0):
            raise ValueError("relevance grades must be nonnegative")

    @property
    def trainable(self) -> bool:
        return self.X.shape[0] >= 2 and len(np.unique(self.relevance)) > 1


def _rank_positions(scores: np.ndarray, item_ids: Sequence[str]) -> np.ndarray:
    """1-based rank of each row under (-score, item_id) ordering."""
    order = sorted(range(len(item_ids)), key=lambda i: (-scores[i], item_ids[i]))
    positions = np.empty(len(item_ids), dtype=np.int64)
    for rank, idx in enumerate(order, start=1):
        positions[idx] = rank
    return positions


def _ideal_dcg(relevance: np.ndarray, cutoff: int) -> float:
    rels = np.sort(relevance)[::-1][:cutoff]
    gains = (2.0 ** rels - 1.0).astype(np.float64)
    discounts = 1.0 / np.log2(np.arange(2, len(rels) + 2, dtype=np.float64))
    return float(gains @ discounts)


def group_ndcg(relevance: np.ndarray, scores: np.ndarray,
               item_ids: Sequence[str], cutoff: int) -> float:
    """NDCG@cutoff of the ranking induced by scores (training diagnostic)."""
    idcg = _ideal_dcg(relevance, cutoff)
    if idcg == 0.0:
        return 0.0
    positions = _rank_positions(scores, item_ids)
    in_cut = positions <= cutoff
    gains = 2.0 ** relevance[in_cut] - 1.0
    discounts = 1.0 / np.log2(positions[in_cut] + 1.0)
    return float(gains @ discounts) / idcg


def lambda_gradients(group: QueryGroup, scores: np.ndarray, sigma: float,
                     ndcg_cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """LambdaRank first and second derivatives for one query group.

    For every pair with rel_i > rel_j:
        rho_ij     = 1 / (1 + exp(sigma * (s_i - s_j)))
        lambda_i  += sigma * rho_ij * |dNDCG_ij|   (lambda_j gets the negative)
        hessian   += sigma^2 * rho_ij * (1 - rho_ij) * |dNDCG_ij|  (both sides)
    |dNDCG_ij| is the absolute NDCG@cutoff change from swapping i and j at
    their current rank positions (discount zero beyond the cutoff).
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    n = group.X.shape[0]
    if scores.shape[0] != n:
        raise ValueError("scores must align with group rows")
    lambdas = np.zeros(n, dtype=np.float64)
    hessians = np.zeros(n, dtype=np.float64)
    rel = group.relevance
    if n < 2 or len(np.unique(rel)) < 2:
        return lambdas, hessians

    idcg = _ideal_dcg(rel, ndcg_cutoff)
    if idcg == 0.0:
        return lambdas, hessians
    positions = _rank_positions(scores, group.item_ids)
    discounts = np.where(positions <= ndcg_cutoff, 1.0 / np.log2(positions + 1.0), 0.0)
    gains = 2.0 ** rel - 1.0

    winner = rel[:, None] > rel[None, :]
    diff = np.clip(sigma * (scores[:, None] - scores[None, :]), -60.0, 60.0)
    rho = 1.0 / (1.0 + np.exp(diff))
    delta = np.abs((gains[:, None] - gains[None, :])
                   * (discounts[:, None] - discounts[None, :])) / idcg

    lam_pair = np.where(winner, sigma * rho * delta, 0.0)
    hess_pair = np.where(winner, sigma * sigma * rho * (1.0 - rho) * delta, 0.0)
    lambdas = lam_pair.sum(axis=1) - lam_pair.sum(axis=0)
    hessians = hess_pair.sum(axis=1) + hess_pair.sum(axis=0)
    return lambdas, hessians


# --------------------------------------------------------------------------
# Regression tree (exact greedy, best-first growth)
# --------------------------------------------------------------------------

@dataclass
class RegressionTree:
    """Array-encoded binary tree; routing goes left iff feature <= threshold."""

    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not np.any(active):
                break
            rows = np.nonzero(active)[0]
            go_left = X[rows, feat[rows]] <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])
        return self.value[node]

    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def to_record(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "RegressionTree":
        return cls(
            feature=np.asarray(rec["feature"], dtype=np.int64),
            threshold=np.asarray(rec["threshold"], dtype=np.float64),
            left=np.asarray(rec["left"], dtype=np.int64),
            right=np.asarray(rec["right"], dtype=np.int64),
            value=np.asarray(rec["value"], dtype=np.float64),
        )


def _leaf_value(targets: np.ndarray, hessians: np.ndarray) -> float:
    value = float(targets.sum() / (hessians.sum() + _HESS_EPS))
    return float(np.clip(value, -_LEAF_CLIP, _LEAF_CLIP))


def _best_split(X: np.ndarray, targets: np.ndarray, rows: np.ndarray,
                min_samples_leaf: int) -> tuple[float, int, float] | None:
    """Best (gain, feature, threshold) by squared-error reduction on targets."""
    n = rows.shape[0]
    if n < 2 * min_samples_leaf:
        return None
    t = targets[rows]
    total_sum = t.sum()
    base = total_sum * total_sum / n
    best = None
    for f in range(X.shape[1]):
        x = X[rows, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ts = t[order]
        csum = np.cumsum(ts)
        n_left = np.arange(1, n, dtype=np.float64)
        left_sum = csum[:-1]
        gains = (left_sum * left_sum / n_left
                 + (total_sum - left_sum) ** 2 / (n - n_left)
                 - base)
        valid = (xs[:-1] < xs[1:])
        valid &= (n_left >= min_samples_leaf) & ((n - n_left) >= min_samples_leaf)
        if not np.any(valid):
            continue
        idx = int(np.argmax(np.where(valid, gains, -np.inf)))
        gain = float(gains[idx])
        if gain > 1e-12 and (best is None or gain > best[0]):
            # Split at the left boundary value so routing stays exact.
            best = (gain, f, float(xs[idx]))
    return best


def fit_tree(X: np.ndarray, targets: np.ndarray, hessians: np.ndarray,
             max_leaves: int = 31, min_samples_leaf: int = 1) -> RegressionTree:
    """Best-first regression tree on gradient targets with Newton leaf values."""
    X = check_feature_matrix(X)
    targets = check_targets(targets, X.shape[0])
    hessians = check_targets(hessians, X.shape[0])
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree on zero rows")

    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    value = [_leaf_value(targets, hessians)]

    all_rows = np.arange(X.shape[0], dtype=np.int64)
    heap: list[tuple[float, int, int, np.ndarray, tuple]] = []
    counter = 0

    def consider(node_id: int, rows: np.ndarray) -> None:
        nonlocal counter
        split = _best_split(X, targets, rows, min_samples_leaf)
        if split is not None:
            gain, f, thr = split
            heappush(heap, (-gain, counter, node_id, rows, (f, thr)))
            counter += 1

    consider(0, all_rows)
    n_leaves = 1
    while heap and n_leaves < max_leaves:
        _, _, node_id, rows, (f, thr) = heappop(heap)
        mask = X[rows, f] <= thr
        left_rows = rows[mask]
        right_rows = rows[~mask]
        for child_rows in (left_rows, right_rows):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(_leaf_value(targets[child_rows], hessians[child_rows]))
        feature[node_id] = f
        threshold[node_id] = thr
        left[node_id] = len(feature) - 2
        right[node_id] = len(feature) - 1
        value[node_id] = 0.0
        n_leaves += 1
        consider(left[node_id], left_rows)
        consider(right[node_id], right_rows)

    return RegressionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=np.float64),
    )


# --------------------------------------------------------------------------
# Boosting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LtrConfig:
    n_trees: int = 300
    learning_rate: float = 0.1
    sigma: float = 1.0
    max_leaves: int = 31
    min_samples_leaf: int | None = None  # default: max(20, 1% of rows)
    ndcg_cutoff: int = 10
    seed: int = 0

    def resolved_min_samples_leaf(self, n_rows: int) -> int:
        if self.min_samples_leaf is not None:
            return self.min_samples_leaf
        return max(20, n_rows // 100)


@dataclass
class LtrModel:
    """Immutable boosted ensemble: base_score + lr * sum of tree outputs."""

    trees: list[RegressionTree]
    learning_rate: float
    base_score: float
    feature_schema: tuple[str, ...]
    sigma: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = check_feature_matrix(X, n_features=len(self.feature_schema))
        out = np.full(X.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out


def schema_hash(schema: Sequence[str]) -> str:
    return hashlib.sha256(",".join(schema).encode("utf-8")).hexdigest()[:16]


def train(groups: Sequence[QueryGroup], config: LtrConfig = LtrConfig(),
          progress=None) -> tuple[LtrModel, list[float]]:
    """Boost LambdaRank trees; returns the model and per-round mean NDCG."""
    groups = list(groups)
    if not any(g.trainable for g in groups):
        raise TrainingError("no trainable pairs: every group has uniform relevance")

    X_all = np.vstack([g.X for g in groups])
    offsets = np.cumsum([0] + [g.X.shape[0] for g in groups])
    n_rows = X_all.shape[0]
    min_leaf = config.resolved_min_samples_leaf(n_rows)

    scores = np.zeros(n_rows, dtype=np.float64)
    trees: list[RegressionTree] = []
    history: list[float] = []

    for round_idx in range(config.n_trees):
        lambdas = np.zeros(n_rows, dtype=np.float64)
        hessians = np.zeros(n_rows, dtype=np.float64)
        for g_idx, group in enumerate(groups):
            lo, hi = offsets[g_idx], offsets[g_idx + 1]
            lam, hess = lambda_gradients(group, scores[lo:hi], config.sigma,
                                         config.ndcg_cutoff)
            lambdas[lo:hi] = lam
            hessians[lo:hi] = hess

        tree = fit_tree(X_all, lambdas, hessians,
                        max_leaves=config.max_leaves, min_samples_leaf=min_leaf)
        trees.append(tree)
        scores += config.learning_rate * tree.predict(X_all)

        mean_ndcg = float(np.mean([
            group_ndcg(g.relevance, scores[offsets[i]:offsets[i + 1]],
                       g.item_ids, config.ndcg_cutoff)
            for i, g in enumerate(groups)]))
        history.append(mean_ndcg)
        if progress is not None:
            progress(round_idx, mean_ndcg)

    model = LtrModel(trees=trees, learning_rate=config.learning_rate,
                     base_score=0.0, feature_schema=FEATURE_SCHEMA,
                     sigma=config.sigma)
    return model, history


def predict(model: LtrModel, rows) -> np.ndarray:
    return model.predict(np.asarray(rows, dtype=np.float64))


def rank(model: LtrModel, candidates: Sequence[tuple[str, np.ndarray]],
         k: int | None = None) -> RankedList:
    """Score candidate (item_id, features) pairs into a RankedList."""
    if not candidates:
        return RankedList()
    ids = [c[0] for c in candidates]
    X = np.vstack([np.asarray(c[1], dtype=np.float64) for c in candidates])
    scores = model.predict(X)
    return RankedList.from_scores(zip(ids, scores.tolist()), k=k)


# --------------------------------------------------------------------------
# Persistence: versioned line-delimited records (header + one tree per line)
# --------------------------------------------------------------------------

def save_model(model: LtrModel, path) -> None:
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "feature_schema": list(model.feature_schema),
        "schema_hash": schema_hash(model.feature_schema),
        "sigma": model.sigma,
        "learning_rate": model.learning_rate,
        "base_score": model.base_score,
        "n_trees": len(model.trees),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for tree in model.trees:
            fh.write(json.dumps(tree.to_record(), separators=(",", ":")) + "\n")


def load_model(path) -> LtrModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty model file", path=str(path))
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=1) from exc
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {header.get('format_version')!r}")
    schema = tuple(header.get("feature_schema", ()))
    if schema_hash(schema) != header.get("schema_hash"):
        raise ModelFormatError("feature schema hash mismatch")
    if schema != FEATURE_SCHEMA:
        raise ModelFormatError(
            "model feature schema does not match this build's schema")
    trees = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            trees.append(RegressionTree.from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad tree record: {exc}",
                             path=str(path), line=lineno) from exc
    if len(trees) != header.get("n_trees"):
        raise ParseError(
            f"expected {header.get('n_trees')} trees, found {len(trees)}",
            path=str(path))
    return LtrModel(trees=trees, learning_rate=float(header["learning_rate"]),
                    base_score=float(header["base_score"]),
                    feature_schema=schema, sigma=float(header["sigma"]))


def save_training_log(history: Sequence[float], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("round,mean_train_ndcg\n")
        for i, value in enumerate(history, start=1):
            fh.write(f"{i},{value:.6f}\n")


class LambdaMartRanker(BaseEstimator):
    """Scikit-learn style interface to the LambdaMART trainer.

    fit(X, y, group) takes stacked feature rows, integer relevance grades,
    and the per-query group sizes partitioning the rows, in order.
    """

    def __init__(self, n_trees: int = 300, learning_rate: float = 0.1,
                 sigma: float = 1.0, max_leaves: int = 31,
                 min_samples_leaf: int | None = None, ndcg_cutoff: int = 10,
                 random_state: int = 0):
        self.n_trees = n_trees
        self.learning_rate = learning_rate
        self.sigma = sigma
        self.max_leaves = max_leaves
        self.min_samples_leaf = min_samples_leaf
        self.ndcg_cutoff = ndcg_cutoff
        self.random_state = random_state

    def fit(self, X, y, group) -> "LambdaMartRanker":
        X = check_feature_matrix(X, n_features=N_FEATURES)
        y = check_targets(y, X.shape[0])
        sizes = check_group_sizes(group, X.shape[0])
        groups = []
        start = 0
        for g_idx, size in enumerate(sizes):
            stop = start + int(size)
            ids = [f"{g_idx:06d}-{r:06d}" for r in range(int(size))]
            groups.append(QueryGroup(query_id=f"g{g_idx:06d}", item_ids=ids,
                                     X=X[start:stop], relevance=y[start:stop]))
            start = stop
        config = LtrConfig(n_trees=self.n_trees, learning_rate=self.learning_rate,
                           sigma=self.sigma, max_leaves=self.max_leaves,
                           min_samples_leaf=self.min_samples_leaf,
                           ndcg_cutoff=self.ndcg_cutoff, seed=self.random_state)
        self.model_, self.train_ndcg_ = train(groups, config)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise TrainingError("ranker is not fitted")
        return self.model_.predict(check_feature_matrix(X, n_features=N_FEATURES))
