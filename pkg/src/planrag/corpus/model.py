"""Data model for personas, context stores, tools, and labeled queries."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

APPS: tuple[str, ...] = (
    "calendar", "google", "mail", "music", "notes", "phonecall", "reminders",
)

SPLITS: tuple[str, ...] = ("train", "test")

_USAGE_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Persona:
    """A synthetic user: free-form attributes plus a habitual app-usage profile
    whose weights sum to one."""

    id: str
    attributes: dict[str, str]
    app_usage_profile: dict[str, float]

    def top_apps(self, n: int = 2) -> list[str]:
        ranked = sorted(self.app_usage_profile.items(), key=lambda kv: (-kv[1], kv[0]))
        return [app for app, _ in ranked[:n]]


@dataclass(frozen=True)
class ContextItem:
    """One dated record inside a persona's per-application store."""

    id: str
    app: str
    title: str
    body: str
    timestamp: datetime
    categorical_tags: dict[str, str]
    access_count: int


@dataclass(frozen=True)
class ContextStore:
    persona_id: str
    app: str
    items: tuple[ContextItem, ...]


@dataclass(frozen=True)
class ToolParam:
    name: str
    description: str
    required: bool


@dataclass(frozen=True)
class Tool:
    """An application API; required params precede optional ones."""

    name: str
    app: str
    description: str
    params: tuple[ToolParam, ...]

    def required_params(self) -> list[ToolParam]:
        return [p for p in self.params if p.required]

    def search_text(self) -> str:
        """Document used for tool retrieval: name + description + param names."""
        return " ".join([self.name, self.description] + [p.name for p in self.params])


def order_params(params) -> tuple[ToolParam, ...]:
    """Required-first ordering, stable within each class."""
    params = list(params)
    return tuple([p for p in params if p.required] + [p for p in params if not p.required])


@dataclass(frozen=True)
class Plan:
    """A single API call with resolved string arguments."""

    api: str
    args: dict[str, str] = field(default_factory=dict)

    def canonical(self) -> str:
        """Canonical serialization: arg keys sorted lexicographically."""
        return json.dumps({"api": self.api, "args": dict(sorted(self.args.items()))},
                          ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class LabeledQuery:
    """An implicit query with gold context, tool, and plan labels."""

    id: str
    persona_id: str
    text: str
    timestamp: datetime
    gold_context_ids: tuple[str, ...]
    gold_tools: tuple[str, ...]
    gold_plan: Plan
    split: str


@dataclass
class Corpus:
    """The full dataset. The epoch window is generator metadata: it is set on
    freshly generated corpora and not persisted, so equality ignores it."""

    personas: list[Persona]
    stores: list[ContextStore]
    toolbox: list[Tool]
    queries: list[LabeledQuery]
    epoch: tuple[datetime, datetime] | None = field(default=None, compare=False)

    def persona_by_id(self) -> dict[str, Persona]:
        return {p.id: p for p in self.personas}

    def stores_for(self, persona_id: str) -> list[ContextStore]:
        return [s for s in self.stores if s.persona_id == persona_id]

    def items_for(self, persona_id: str) -> list[ContextItem]:
        return [item for s in self.stores_for(persona_id) for item in s.items]

    def item_by_id(self) -> dict[str, ContextItem]:
        return {item.id: item for s in self.stores for item in s.items}

    def tool_names(self) -> set[str]:
        return {t.name for t in self.toolbox}

    def queries_for_split(self, split: str) -> list[LabeledQuery]:
        return [q for q in self.queries if q.split == split]


def item_text(item: ContextItem) -> str:
    """The text form of an item used by every retrieval stage."""
    return f"{item.title}. {item.body}"


def ensure_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def validate_corpus(corpus: Corpus) -> list[str]:
    """Check every data-model invariant; returns one message per violation."""
    violations: list[str] = []
    seen_personas: set[str] = set()
    for persona in corpus.personas:
        if persona.id in seen_personas:
            violations.append(f"persona {persona.id}: duplicate persona id")
        seen_personas.add(persona.id)
        total = 0.0
        for app, weight in persona.app_usage_profile.items():
            if app not in APPS:
                violations.append(f"persona {persona.id}: unknown app {app!r} in usage profile")
            if weight < 0:
                violations.append(f"persona {persona.id}: negative usage weight for {app}")
            total += weight
        if abs(total - 1.0) > _USAGE_SUM_TOL:
            violations.append(
                f"persona {persona.id}: usage profile sums to {total!r}, expected 1")

    items_by_persona: dict[str, set[str]] = {}
    for store in corpus.stores:
        if store.persona_id not in seen_personas:
            violations.append(f"store {store.persona_id}/{store.app}: unknown persona")
        if store.app not in APPS:
            violations.append(f"store {store.persona_id}/{store.app}: unknown app")
        seen_ids = items_by_persona.setdefault(store.persona_id, set())
        for item in store.items:
            if item.id in seen_ids:
                violations.append(f"item {item.id}: duplicate item id within persona")
            seen_ids.add(item.id)
            if item.app != store.app:
                violations.append(
                    f"item {item.id}: app {item.app!r} differs from store app {store.app!r}")
            if item.access_count < 0:
                violations.append(f"item {item.id}: negative access_count")
            if corpus.epoch is not None:
                start, end = corpus.epoch
                if not (start <= ensure_utc(item.timestamp) <= end):
                    violations.append(f"item {item.id}: timestamp outside epoch window")

    seen_tools: set[tuple[str, str]] = set()
    tool_names: set[str] = set()
    for tool in corpus.toolbox:
        key = (tool.app, tool.name)
        if key in seen_tools:
            violations.append(f"tool {tool.app}/{tool.name}: duplicate tool")
        seen_tools.add(key)
        tool_names.add(tool.name)
        if tool.app not in APPS:
            violations.append(f"tool {tool.name}: unknown app {tool.app!r}")
        seen_optional = False
        for param in tool.params:
            if param.required and seen_optional:
                violations.append(
                    f"tool {tool.name}: required param {param.name!r} after optional one")
            seen_optional = seen_optional or not param.required

    seen_queries: set[str] = set()
    for query in corpus.queries:
        if query.id in seen_queries:
            violations.append(f"query {query.id}: duplicate query id")
        seen_queries.add(query.id)
        if query.persona_id not in seen_personas:
            violations.append(f"query {query.id}: unknown persona {query.persona_id!r}")
        if query.split not in SPLITS:
            violations.append(f"query {query.id}: invalid split {query.split!r}")
        if not query.gold_context_ids:
            violations.append(f"query {query.id}: gold_context_ids is empty")
        persona_items = items_by_persona.get(query.persona_id, set())
        for gold_id in query.gold_context_ids:
            if gold_id not in persona_items:
                violations.append(
                    f"query {query.id}: gold context id {gold_id!r} not found for persona")
        if not 1 <= len(query.gold_tools) <= 3:
            violations.append(f"query {query.id}: gold_tools must have 1-3 entries")
        for name in query.gold_tools:
            if name not in tool_names:
                violations.append(f"query {query.id}: gold tool {name!r} not in toolbox")
        if query.gold_plan.api not in query.gold_tools:
            violations.append(
                f"query {query.id}: gold plan api {query.gold_plan.api!r} not in gold_tools")
    return violations
