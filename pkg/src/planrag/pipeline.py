"""End-to-end orchestration: context retrieval, tool retrieval, planning.

Context modes cover the ablation grid: ``none`` skips context retrieval
entirely, ``bm25`` and ``semantic`` run federated per-store search,
``ltr-rrf`` fuses pooled bm25/semantic/ranker lists, and ``oracle`` injects
the gold context. Tool retrieval is cosine search over tool documents built
from name, description, and parameter names, searched with the query text
concatenated with retrieved context. The bundled planner is a deterministic
mock that picks the highest-ranked tool whose required parameters it can
ground in the query or retrieved context; an external planner can be plugged
in over a JSON wire format.
"""
from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .corpus.model import (ContextItem, Corpus, LabeledQuery, Plan, Tool,
                           item_text)
from .corpus.templates import norm_text
from .errors import ConfigurationError, PlannerError
from .fusion import (FusionConfig, RetrievalArtifacts, federated_retrieve)
from .metrics import (PlanMatch, QueryEval, EvalReport, RetrievalJudgment,
                      aggregate, ast_match, ndcg_at_k, recall_at_k)
from .retrieval import Embedding, HashedTfidfEmbedder, RankedList, tokenize

CONTEXT_MODES = ("none", "bm25", "semantic", "ltr-rrf", "oracle")
TOOLS_MODES = ("retrieve", "oracle", "all")
PLANNERS = ("mock", "external")

EVAL_K_VALUES = (1, 3, 5, 10)

_MAX_SEARCH_TOKENS = 512

# Params the mock planner may ground with a whole context-item title.
_FREE_TEXT_PARAMS = frozenset({"query", "title", "song", "playlist", "text"})

_MALFORMED_PLAN = Plan(api="", args={})


@dataclass(frozen=True)
class PipelineConfig:
    context_mode: str = "ltr-rrf"
    k_context: int = 5
    k_tools: int = 3
    planner: str = "mock"
    tools_mode: str = "retrieve"
    fusion: FusionConfig | None = None  # None: derived from context_mode
    external_endpoint: str | None = None
    external_timeout: float = 10.0

    def __post_init__(self):
        if self.context_mode not in CONTEXT_MODES:
            raise ConfigurationError(f"unknown context mode {self.context_mode!r}")
        if self.tools_mode not in TOOLS_MODES:
            raise ConfigurationError(f"unknown tools mode {self.tools_mode!r}")
        if self.planner not in PLANNERS:
            raise ConfigurationError(f"unknown planner {self.planner!r}")
        if self.k_context < 1 or self.k_tools < 1:
            raise ConfigurationError("k_context and k_tools must be >= 1")

    def resolved_fusion(self) -> FusionConfig | None:
        if self.context_mode == "none":
            return None
        if self.fusion is not None:
            return self.fusion
        if self.context_mode == "oracle":
            return FusionConfig(backend="oracle")
        if self.context_mode == "ltr-rrf":
            return FusionConfig(mode="fuse-rankers", backend="ltr")
        return FusionConfig(mode="fuse-stores", backend=self.context_mode)


# Table-style ablation presets.
PIPELINE_PRESETS: dict[str, PipelineConfig] = {
    "lower-bound": PipelineConfig(context_mode="none", tools_mode="all"),
    "rag": PipelineConfig(context_mode="none", tools_mode="retrieve"),
    "context-tuned": PipelineConfig(context_mode="ltr-rrf", tools_mode="retrieve"),
    "upper-bound": PipelineConfig(context_mode="oracle", tools_mode="oracle"),
}


@dataclass
class PipelineTrace:
    query_id: str
    retrieved_context: RankedList
    retrieved_tools: RankedList
    plan: Plan | None
    timings_ms: dict[str, float] = field(default_factory=dict)
    error: str | None = None


def build_tool_search(toolbox: Sequence[Tool], dims: int = 1024
                      ) -> tuple[HashedTfidfEmbedder, dict[str, Embedding]]:
    """Embedder fitted on tool documents plus the per-tool vectors."""
    if not toolbox:
        raise ConfigurationError("toolbox is empty")
    embedder = HashedTfidfEmbedder(dims=dims).fit(t.search_text() for t in toolbox)
    vectors = {t.name: embedder.embed(t.search_text()) for t in toolbox}
    return embedder, vectors


def retrieve_tools(query: LabeledQuery, context: Sequence[ContextItem],
                   toolbox: Sequence[Tool], embedder: HashedTfidfEmbedder,
                   k_tools: int,
                   tool_vectors: dict[str, Embedding] | None = None) -> RankedList:
    """Cosine top-k tools for the query text augmented with retrieved context."""
    if not toolbox:
        raise ConfigurationError("toolbox is empty")
    if tool_vectors is None:
        tool_vectors = {t.name: embedder.embed(t.search_text()) for t in toolbox}
    parts = [query.text] + [item_text(item) for item in context]
    tokens = tokenize(" ".join(parts))[:_MAX_SEARCH_TOKENS]
    query_vec = embedder.embed(" ".join(tokens))
    scores = {name: query_vec.dot(vec) for name, vec in tool_vectors.items()}
    return RankedList.from_scores(scores, k=k_tools)


def _fill_param(param_name: str, query_tokens: set[str],
                context: Sequence[ContextItem]) -> str | None:
    # A context item may ground a param only if the query actually touches
    # it: its tag value or title must share at least one token with the query.
    for item in context:
        tag_value = item.categorical_tags.get(param_name)
        if tag_value is None:
            continue
        if (set(tokenize(tag_value)) & query_tokens
                or set(tokenize(item.title)) & query_tokens):
            return norm_text(tag_value)
    if param_name in _FREE_TEXT_PARAMS:
        for item in context:
            if set(tokenize(item.title)) & query_tokens:
                return norm_text(item.title)
    return None


def mock_plan(query: LabeledQuery, context: Sequence[ContextItem],
              tools: RankedList, toolbox: Sequence[Tool]) -> Plan:
    """Deterministic planner: the highest-ranked tool whose every required
    param can be grounded wins; otherwise the "default" no-op plan."""
    if not tools:
        raise ValueError("mock_plan requires a nonempty ranked tool list")
    by_name = {t.name: t for t in toolbox}
    query_tokens = set(tokenize(query.text))
    for tool_name, _ in tools:
        tool = by_name.get(tool_name)
        if tool is None:
            continue
        args: dict[str, str] = {}
        fillable = True
        for param in tool.params:
            if not param.required:
                continue
            value = _fill_param(param.name, query_tokens, context)
            if value is None:
                fillable = False
                break
            args[param.name] = value
        if fillable:
            return Plan(api=tool.name, args=args)
    return Plan(api="default", args={})


def run_external_planner(endpoint: str, query: LabeledQuery,
                         context: Sequence[ContextItem], tools: RankedList,
                         toolbox: Sequence[Tool], timeout: float = 10.0) -> Plan:
    """POST the planning request to an external endpoint.

    Request: {"query", "context": [{"title", "body"}], "tools": [...]};
    response: {"api": str, "args": {str: str}}. Unparseable responses return
    the sentinel malformed plan (which scores as a hallucination downstream);
    transport failures raise PlannerError.
    """
    by_name = {t.name: t for t in toolbox}
    payload = {
        "query": query.text,
        "context": [{"title": item.title, "body": item.body} for item in context],
        "tools": [
            {"name": name,
             "description": by_name[name].description if name in by_name else "",
             "params": [{"name": p.name, "description": p.description,
                         "required": p.required}
                        for p in by_name[name].params] if name in by_name else []}
            for name, _ in tools],
    }
    request = urllib.request.Request(
        endpoint, data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            body = response.read().decode("utf-8")
    except (urllib.error.URLError, TimeoutError, OSError) as exc:
        raise PlannerError(f"external planner call failed: {exc}") from exc
    try:
        parsed = json.loads(body)
        api = parsed["api"]
        args = parsed.get("args", {})
        if not isinstance(api, str) or not isinstance(args, dict):
            return _MALFORMED_PLAN
        return Plan(api=api, args={str(k): str(v) for k, v in args.items()})
    except (json.JSONDecodeError, KeyError, TypeError):
        return _MALFORMED_PLAN


def _tool_list_all(toolbox: Sequence[Tool]) -> RankedList:
    return RankedList(tuple((name, 0.0) for name in sorted(t.name for t in toolbox)))


def _tool_list_oracle(query: LabeledQuery) -> RankedList:
    return RankedList(tuple((name, 1.0 / (rank + 1))
                            for rank, name in enumerate(query.gold_tools)))


PlannerFn = Callable[[LabeledQuery, Sequence[ContextItem], RankedList, Sequence[Tool]], Plan]


def run_pipeline(corpus: Corpus, split: str, cfg: PipelineConfig,
                 artifacts: RetrievalArtifacts,
                 planner_fn: PlannerFn | None = None,
                 dims: int = 1024) -> tuple[list[PipelineTrace], EvalReport]:
    """Run every query of the split through the configured stages.

    Results come back in query-id order, one trace per query; per-query
    failures of an external planner are recorded on the trace and scored as
    incorrect rather than aborting the run.
    """
    fusion_cfg = cfg.resolved_fusion()
    if cfg.context_mode == "ltr-rrf" and artifacts.ltr_model is None:
        raise ConfigurationError(
            "context mode 'ltr-rrf' requires a trained ranker model")
    if cfg.planner == "external" and planner_fn is None and not cfg.external_endpoint:
        raise ConfigurationError("external planner requires an endpoint")

    embedder, tool_vectors = build_tool_search(corpus.toolbox, dims=dims)
    stores_by_persona: dict[str, list] = {}
    for store in corpus.stores:
        stores_by_persona.setdefault(store.persona_id, []).append(store)
    items_by_id = corpus.item_by_id()
    toolbox_names = frozenset(corpus.tool_names())

    queries = corpus.queries_for_split(split)
    traces: list[PipelineTrace] = []
    records: list[QueryEval] = []

    for query in queries:
        timings: dict[str, float] = {}
        error: str | None = None

        t0 = time.perf_counter()
        if fusion_cfg is None:
            context_ranked = RankedList()
        else:
            context_ranked = federated_retrieve(
                query, stores_by_persona.get(query.persona_id, ()),
                fusion_cfg, artifacts, k=max(cfg.k_context, max(EVAL_K_VALUES)))
        timings["context_ms"] = (time.perf_counter() - t0) * 1000.0
        context_items = [items_by_id[i] for i in context_ranked.ids()[:cfg.k_context]
                         if i in items_by_id]

        t0 = time.perf_counter()
        if cfg.tools_mode == "oracle":
            tools_ranked = _tool_list_oracle(query)
        elif cfg.tools_mode == "all":
            tools_ranked = _tool_list_all(corpus.toolbox)
        else:
            tools_ranked = retrieve_tools(query, context_items, corpus.toolbox,
                                          embedder, max(cfg.k_tools, max(EVAL_K_VALUES)),
                                          tool_vectors)
        timings["tools_ms"] = (time.perf_counter() - t0) * 1000.0
        planner_tools = tools_ranked.top(cfg.k_tools) \
            if cfg.tools_mode == "retrieve" else tools_ranked

        t0 = time.perf_counter()
        plan: Plan | None
        try:
            if planner_fn is not None:
                plan = planner_fn(query, context_items, planner_tools, corpus.toolbox)
            elif cfg.planner == "external":
                plan = run_external_planner(cfg.external_endpoint, query,
                                            context_items, planner_tools,
                                            corpus.toolbox,
                                            timeout=cfg.external_timeout)
            else:
                plan = mock_plan(query, context_items, planner_tools, corpus.toolbox)
        except PlannerError as exc:
            plan = None
            error = str(exc)
        timings["plan_ms"] = (time.perf_counter() - t0) * 1000.0

        traces.append(PipelineTrace(
            query_id=query.id, retrieved_context=context_ranked,
            retrieved_tools=tools_ranked, plan=plan, timings_ms=timings,
            error=error))

        rec = QueryEval(query_id=query.id)
        if fusion_cfg is not None:
            judgment = RetrievalJudgment(query_id=query.id,
                                         gold_ids=frozenset(query.gold_context_ids))
            for k in EVAL_K_VALUES:
                rec.retrieval[f"recall@{k}"] = recall_at_k(
                    context_ranked, set(query.gold_context_ids), k)
                rec.retrieval[f"ndcg@{k}"] = ndcg_at_k(context_ranked, judgment, k)
        for k in EVAL_K_VALUES:
            rec.retrieval[f"tool_recall@{k}"] = recall_at_k(
                tools_ranked, set(query.gold_tools), k)
        if plan is None:
            rec.plan = PlanMatch(exact=False, ast_correct=False, hallucinated=False)
        else:
            rec.plan = ast_match(plan, query.gold_plan, toolbox_names)
        records.append(rec)

    return traces, aggregate(records)


# --------------------------------------------------------------------------
# Stage evaluations (shared by the CLI and the acceptance suite)
# --------------------------------------------------------------------------

def _context_fusion_for_mode(mode: str, rrf_k: float) -> FusionConfig:
    if mode == "oracle":
        return FusionConfig(rrf_k=rrf_k, backend="oracle")
    if mode == "ltr-rrf":
        return FusionConfig(rrf_k=rrf_k, mode="fuse-rankers", backend="ltr")
    if mode in ("bm25", "semantic"):
        return FusionConfig(rrf_k=rrf_k, mode="fuse-stores", backend=mode)
    raise ConfigurationError(f"unknown context retrieval mode {mode!r}")


def evaluate_context(corpus: Corpus, split: str, modes: Sequence[str],
                     k_values: Sequence[int], artifacts: RetrievalArtifacts,
                     rrf_k: float = 60.0) -> list[tuple[str, EvalReport]]:
    """Context-retrieval metrics per mode over the split's queries."""
    stores_by_persona: dict[str, list] = {}
    for store in corpus.stores:
        stores_by_persona.setdefault(store.persona_id, []).append(store)
    queries = corpus.queries_for_split(split)
    k_max = max(k_values)
    rows = []
    for mode in modes:
        fusion_cfg = _context_fusion_for_mode(mode, rrf_k)
        records = []
        for query in queries:
            ranked = federated_retrieve(
                query, stores_by_persona.get(query.persona_id, ()),
                fusion_cfg, artifacts, k=k_max)
            judgment = RetrievalJudgment(query_id=query.id,
                                         gold_ids=frozenset(query.gold_context_ids))
            rec = QueryEval(query_id=query.id)
            for k in k_values:
                rec.retrieval[f"recall@{k}"] = recall_at_k(
                    ranked, set(query.gold_context_ids), k)
                rec.retrieval[f"ndcg@{k}"] = ndcg_at_k(ranked, judgment, k)
            records.append(rec)
        rows.append((mode, aggregate(records)))
    return rows


def evaluate_tools(corpus: Corpus, split: str, context_modes: Sequence[str],
                   k_values: Sequence[int], artifacts: RetrievalArtifacts,
                   k_context: int = 5, rrf_k: float = 60.0,
                   dims: int = 1024) -> list[tuple[str, EvalReport]]:
    """Tool-retrieval Recall@K with context supplied by each context mode."""
    stores_by_persona: dict[str, list] = {}
    for store in corpus.stores:
        stores_by_persona.setdefault(store.persona_id, []).append(store)
    items_by_id = corpus.item_by_id()
    embedder, tool_vectors = build_tool_search(corpus.toolbox, dims=dims)
    queries = corpus.queries_for_split(split)
    k_max = max(k_values)
    rows = []
    for mode in context_modes:
        fusion_cfg = None if mode == "none" else _context_fusion_for_mode(mode, rrf_k)
        records = []
        for query in queries:
            if fusion_cfg is None:
                context_items: list[ContextItem] = []
            else:
                ranked = federated_retrieve(
                    query, stores_by_persona.get(query.persona_id, ()),
                    fusion_cfg, artifacts, k=k_context)
                context_items = [items_by_id[i] for i in ranked.ids()
                                 if i in items_by_id]
            tools_ranked = retrieve_tools(query, context_items, corpus.toolbox,
                                          embedder, k_max, tool_vectors)
            rec = QueryEval(query_id=query.id)
            for k in k_values:
                rec.retrieval[f"tool_recall@{k}"] = recall_at_k(
                    tools_ranked, set(query.gold_tools), k)
            records.append(rec)
        rows.append((mode, aggregate(records)))
    return rows


def config_for_e2e_mode(mode: str) -> PipelineConfig:
    """Map an e2e mode name (preset or context mode) to a pipeline config."""
    if mode in PIPELINE_PRESETS:
        return PIPELINE_PRESETS[mode]
    return PipelineConfig(context_mode=mode, tools_mode="retrieve")


def evaluate_e2e(corpus: Corpus, split: str, modes: Sequence[str],
                 artifacts: RetrievalArtifacts,
                 dims: int = 1024) -> list[tuple[str, EvalReport]]:
    rows = []
    for mode in modes:
        cfg = config_for_e2e_mode(mode)
        _, report = run_pipeline(corpus, split, cfg, artifacts, dims=dims)
        rows.append((mode, report))
    return rows
