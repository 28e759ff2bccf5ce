"""Evaluation mathematics: Recall@K, NDCG@K, plan matching, aggregation.

NDCG uses the exponential gain form (2^rel - 1) / log2(i + 1); with binary
labels this coincides with the linear form. A query whose ideal DCG is zero
scores zero. Recall keeps |gold| as the denominator even when |gold| > k, so
recall can cap below 1 by design (noted in report footnotes).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus.model import Plan
from .corpus.templates import norm_text
from .errors import ReportError
from .retrieval import RankedList

RECALL_FOOTNOTE = ("recall denominator is |gold| even when |gold| > K, "
                   "so recall can cap below 1")


@dataclass(frozen=True)
class RetrievalJudgment:
    """Gold labels for one query; ``graded`` optionally maps ids to integer
    relevance grades, otherwise relevance is binary on ``gold_ids``."""

    query_id: str
    gold_ids: frozenset[str]
    graded: Mapping[str, int] | None = None

    def relevance(self, item_id: str) -> int:
        if self.graded is not None:
            return int(self.graded.get(item_id, 0))
        return 1 if item_id in self.gold_ids else 0

    def ideal_relevances(self) -> list[int]:
        if self.graded is not None:
            rels = sorted((int(v) for v in self.graded.values()), reverse=True)
            return [r for r in rels if r > 0]
        return [1] * len(self.gold_ids)


@dataclass(frozen=True)
class PlanJudgment:
    query_id: str
    predicted: Plan
    gold: Plan
    toolbox_names: frozenset[str]


def recall_at_k(ranked: RankedList, gold: set[str] | frozenset[str], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not gold:
        raise ValueError("gold set must be nonempty")
    top = set(ranked.ids()[:k])
    return len(top & set(gold)) / len(gold)


def _dcg(relevances: Sequence[int], k: int) -> float:
    return sum((2.0 ** rel - 1.0) / math.log2(i + 2.0)
               for i, rel in enumerate(relevances[:k]))


def ndcg_at_k(ranked: RankedList, judgment: RetrievalJudgment, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    rels = [judgment.relevance(item_id) for item_id in ranked.ids()]
    idcg = _dcg(judgment.ideal_relevances(), k)
    if idcg == 0.0:
        return 0.0
    return _dcg(rels, k) / idcg


# The "default" api is the sanctioned no-tool fallback, not an imaginary
# tool, so it never counts as a hallucination.
DEFAULT_API = "default"


@dataclass(frozen=True)
class PlanMatch:
    exact: bool
    ast_correct: bool
    hallucinated: bool


def _normalize_plan(plan: Plan) -> tuple[str, dict[str, str]]:
    api = norm_text(plan.api)
    args = {key.strip(): norm_text(value) for key, value in plan.args.items()}
    return api, args


def ast_match(pred: Plan, gold: Plan, toolbox_names: Iterable[str]) -> PlanMatch:
    """Structural plan comparison.

    ast_correct requires equal api names, pred's args to agree with gold's on
    every gold key, and no extra non-empty args; exact requires byte-equal
    canonical serializations of the normalized plans. A plan is hallucinated
    when its api is neither in the toolbox nor the "default" fallback.
    """
    names = {norm_text(n) for n in toolbox_names}
    pred_api, pred_args = _normalize_plan(pred)
    gold_api, gold_args = _normalize_plan(gold)

    hallucinated = pred_api not in names and pred_api != DEFAULT_API
    api_ok = pred_api == gold_api
    args_ok = all(pred_args.get(key) == value for key, value in gold_args.items())
    extras_ok = all(not value for key, value in pred_args.items()
                    if key not in gold_args)
    ast_correct = api_ok and args_ok and extras_ok

    exact = (Plan(api=pred_api, args=pred_args).canonical()
             == Plan(api=gold_api, args=gold_args).canonical())
    return PlanMatch(exact=exact, ast_correct=ast_correct, hallucinated=hallucinated)


@dataclass
class QueryEval:
    """Per-query measurements; only the populated families are aggregated."""

    query_id: str
    retrieval: dict[str, float] = field(default_factory=dict)
    plan: PlanMatch | None = None


@dataclass
class EvalReport:
    """Mean metrics over a query set, as percentages."""

    n_queries: int
    metrics: dict[str, float]
    footnotes: tuple[str, ...] = ()

    def formatted(self) -> dict[str, str]:
        return {name: f"{value:.2f}" for name, value in self.metrics.items()}


def aggregate(records: Sequence[QueryEval]) -> EvalReport:
    """Mean each present metric over the queries, expressed as a percentage."""
    records = list(records)
    if not records:
        raise ReportError("refusing to aggregate an empty record set")
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    footnotes: set[str] = set()
    for rec in records:
        for name, value in rec.retrieval.items():
            sums[name] = sums.get(name, 0.0) + value
            counts[name] = counts.get(name, 0) + 1
            if name.startswith("recall@"):
                footnotes.add(RECALL_FOOTNOTE)
        if rec.plan is not None:
            for name, value in (("plan_acc", rec.plan.ast_correct),
                                ("exact_match", rec.plan.exact),
                                ("hallucination", rec.plan.hallucinated)):
                sums[name] = sums.get(name, 0.0) + (1.0 if value else 0.0)
                counts[name] = counts.get(name, 0) + 1
    metrics = {name: 100.0 * sums[name] / counts[name] for name in sums}
    return EvalReport(n_queries=len(records), metrics=metrics,
                      footnotes=tuple(sorted(footnotes)))


def retrieval_metric_names(k_values: Sequence[int]) -> list[str]:
    return [f"recall@{k}" for k in k_values] + [f"ndcg@{k}" for k in k_values]


PLAN_METRIC_NAMES = ["plan_acc", "exact_match", "hallucination"]


def render_table(rows: Sequence[tuple[str, EvalReport]],
                 columns: Sequence[str], *, label: str = "setting") -> str:
    """Fixed-width human-readable table of reports, one row per setting."""
    header = [label] + list(columns)
    table = [header]
    for name, report in rows:
        formatted = report.formatted()
        table.append([name] + [formatted.get(col, "-") for col in columns])
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for r_idx, row in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if r_idx == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(header))))
    footnotes = {fn for _, report in rows for fn in report.footnotes}
    for fn in sorted(footnotes):
        lines.append(f"note: {fn}")
    return "\n".join(lines) + "\n"


def render_csv(rows: Sequence[tuple[str, EvalReport]],
               columns: Sequence[str], *, label: str = "setting") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([label] + list(columns))
    for name, report in rows:
        formatted = report.formatted()
        writer.writerow([name] + [formatted.get(col, "") for col in columns])
    return buf.getvalue()
