"""Deterministic synthetic corpus generation.

Everything is drawn from a single seeded ``random.Random`` stream in a fixed
order, so a given (seed, n_personas, epoch_start) always produces a
byte-identical corpus. Gold labels are assigned by construction: each query
is instantiated from the context item it asks about, so the relevant item,
tool list, and resolved plan are known exactly.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from ..errors import ConfigurationError
from .model import (APPS, ContextItem, ContextStore, Corpus, LabeledQuery,
                    Persona, Plan, ensure_utc)
from .templates import (HOBBIES, KINDS_BY_APP, PROFESSIONS, SPORTS, ItemDraft,
                        build_toolbox, make_persona_context)

# Per-app mean item counts the generator targets (items drawn from a Poisson
# with these means, floored at one so every store is searchable).
APP_ITEM_MEANS: dict[str, float] = {
    "mail": 2.93,
    "calendar": 5.63,
    "google": 9.57,
    "notes": 2.23,
    "music": 4.38,
    "reminders": 4.81,
    "phonecall": 2.34,
}

# Sized so the default 791 personas yield ~5274 queries, split ~4338 train
# and ~936 test.
_QUERIES_PER_PERSONA_BASE = 6
_EXTRA_QUERY_RATE = 0.6675
TRAIN_FRACTION = 4338 / (4338 + 936)

_IMPLICIT_RATE = 0.4
_TWIN_RATE = 0.15

DEFAULT_EPOCH_START = datetime(2024, 1, 15, 9, 0, 0, tzinfo=timezone.utc)
DEFAULT_WINDOW_DAYS = 15


def _poisson(rng: random.Random, lam: float) -> int:
    # Knuth's product-of-uniforms method; fine for the small means used here.
    limit = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


@dataclass
class _WorkItem:
    draft: ItemDraft
    app: str
    timestamp: datetime = None  # type: ignore[assignment]
    access_count: int = 0
    is_favorite: bool = False
    item_id: str = ""


@dataclass
class _QueryDraftRec:
    persona_id: str
    text: str
    timestamp: datetime
    gold_context_ids: tuple[str, ...]
    gold_tools: tuple[str, ...]
    gold_plan: Plan


def _weighted_kind(rng: random.Random, kinds, *, queryable_only: bool = False):
    pool = [k for k in kinds if not k.digest
            and (k.queryable or not queryable_only)]
    total = sum(k.weight for k in pool)
    r = rng.random() * total
    acc = 0.0
    for kind in pool:
        acc += kind.weight
        if r <= acc:
            return kind
    return pool[-1]


def _weighted_template(rng: random.Random, templates):
    total = sum(t.weight for t in templates)
    r = rng.random() * total
    acc = 0.0
    for template in templates:
        acc += template.weight
        if r <= acc:
            return template
    return templates[-1]


def _item_timestamp(rng: random.Random, as_of: datetime, window_days: int,
                    *, recent: bool, hour: int) -> datetime:
    if recent:
        days_back = rng.randrange(1, min(4, window_days + 1))
    else:
        days_back = rng.randrange(1, max(2, window_days))
    ts = (as_of - timedelta(days=days_back)).replace(
        hour=hour, minute=rng.randrange(60), second=rng.randrange(60), microsecond=0)
    start = as_of - timedelta(days=window_days)
    return max(start, min(ts, as_of - timedelta(hours=1)))


def generate_corpus(seed: int, n_personas: int,
                    epoch_start: datetime = DEFAULT_EPOCH_START,
                    window_days: int = DEFAULT_WINDOW_DAYS) -> Corpus:
    """Generate personas, stores, the fixed toolbox, and labeled queries.

    ``epoch_start`` is the corpus "as of" moment; items are dated within the
    ``window_days`` preceding it and queries the day after.
    """
    if n_personas < 1:
        raise ConfigurationError(f"n_personas must be >= 1, got {n_personas}")
    if window_days <= 0:
        raise ConfigurationError(
            f"epoch window ends before it starts (window_days={window_days})")
    as_of = ensure_utc(epoch_start)
    rng = random.Random(seed)
    toolbox = build_toolbox()

    personas: list[Persona] = []
    stores: list[ContextStore] = []
    query_drafts: list[_QueryDraftRec] = []

    for p_idx in range(n_personas):
        persona_id = f"persona-{p_idx:04d}"
        ctx = make_persona_context(rng)
        attributes = {
            "age": str(rng.randrange(18, 76)),
            "profession": rng.choice(PROFESSIONS),
            "favorite_music_genre": ctx["genre"],
            "favorite_cuisine": ctx["cuisine"],
            "favorite_sport": rng.choice(SPORTS),
            "hobbies": ", ".join(rng.sample(HOBBIES, 3)),
        }
        habit_hour = {app: rng.randrange(8, 21) for app in APPS}

        work_by_app: dict[str, list[_WorkItem]] = {}
        for app in APPS:
            kinds = KINDS_BY_APP[app]
            digest_kind = next((k for k in kinds if k.digest), None)
            n_items = max(1, _poisson(rng, APP_ITEM_MEANS[app]))
            items: list[_WorkItem] = []
            for i in range(n_items):
                queryable_priors = [
                    w for w in items
                    if any(k.name == w.draft.kind and k.queryable for k in kinds)]
                if i == 1 and digest_kind is not None:
                    # Every multi-item store carries exactly one digest entry.
                    draft = digest_kind.make(rng, ctx)
                elif i > 1 and queryable_priors and rng.random() < _TWIN_RATE:
                    # Recurring entry: same kind and subject, fresh date later.
                    source = rng.choice(queryable_priors)
                    draft = source.draft
                else:
                    kind = _weighted_kind(rng, kinds, queryable_only=(i == 0))
                    draft = kind.make(rng, ctx)
                items.append(_WorkItem(draft=draft, app=app))

            # One habitual favorite per store: recent, frequently accessed,
            # and pinned near the persona's habitual hour for this app.
            queryable = [w for w in items
                         if any(k.name == w.draft.kind and k.queryable for k in kinds)]
            favorite = rng.choice(queryable) if queryable else None
            for w in items:
                if w is favorite:
                    w.is_favorite = True
                    w.access_count = rng.randrange(25, 61)
                    hour = min(23, max(0, habit_hour[app] + rng.choice((-1, 0, 1))))
                    w.timestamp = _item_timestamp(rng, as_of, window_days,
                                                  recent=True, hour=hour)
                else:
                    w.access_count = rng.randrange(0, 9)
                    w.timestamp = _item_timestamp(rng, as_of, window_days,
                                                  recent=False,
                                                  hour=rng.randrange(7, 23))
            work_by_app[app] = items

        all_items = [w for app in APPS for w in work_by_app[app]]
        serials = list(range(len(all_items)))
        rng.shuffle(serials)
        for w, serial in zip(all_items, serials):
            w.item_id = f"item-{p_idx:04d}-{serial:03d}"

        usage_raw = {app: len(work_by_app[app]) * rng.uniform(0.75, 1.25)
                     for app in APPS}
        total_raw = sum(usage_raw.values())
        usage = {app: usage_raw[app] / total_raw for app in APPS}

        personas.append(Persona(id=persona_id, attributes=attributes,
                                app_usage_profile=usage))
        for app in APPS:
            stores.append(ContextStore(
                persona_id=persona_id, app=app,
                items=tuple(
                    ContextItem(id=w.item_id, app=w.app, title=w.draft.title,
                                body=w.draft.body, timestamp=w.timestamp,
                                categorical_tags=dict(w.draft.tags),
                                access_count=w.access_count)
                    for w in work_by_app[app])))

        # Queries: explicit ones anchor on any queryable item, implicit ones
        # on a store favorite (the habitual-signal cases).
        kind_lookup = {(app, k.name): k for app in APPS for k in KINDS_BY_APP[app]}
        queryable_items = [w for w in all_items
                           if kind_lookup[(w.app, w.draft.kind)].queryable]
        implicit_favorites = [
            w for w in all_items if w.is_favorite
            and any(t.nature == "implicit"
                    for t in kind_lookup[(w.app, w.draft.kind)].queries)]

        n_queries = _QUERIES_PER_PERSONA_BASE + (1 if rng.random() < _EXTRA_QUERY_RATE else 0)
        for _ in range(n_queries):
            implicit = bool(implicit_favorites) and rng.random() < _IMPLICIT_RATE
            if implicit:
                # Weight favorites by store size so the per-item gold rate is
                # uniform across apps (keeps learned app priors flat).
                weights = [len(work_by_app[w.app]) for w in implicit_favorites]
                anchor = rng.choices(implicit_favorites, weights=weights, k=1)[0]
                templates = [t for t in kind_lookup[(anchor.app, anchor.draft.kind)].queries
                             if t.nature == "implicit"]
            else:
                anchor = rng.choice(queryable_items)
                templates = [t for t in kind_lookup[(anchor.app, anchor.draft.kind)].queries
                             if t.nature == "explicit"]
            template = _weighted_template(rng, templates)
            qd = template.build(anchor.draft.slots)

            mates = [w for w in work_by_app[anchor.app]
                     if w is not anchor and w.draft.kind == anchor.draft.kind
                     and w.draft.subject == anchor.draft.subject]
            mates.sort(key=lambda w: (w.timestamp, w.item_id), reverse=True)
            gold_ids = (anchor.item_id,) + tuple(w.item_id for w in mates)

            if implicit:
                hour = min(23, max(0, habit_hour[anchor.app] + rng.choice((-1, 0, 1))))
            else:
                hour = rng.randrange(8, 23)
            q_ts = (as_of + timedelta(days=1)).replace(
                hour=hour, minute=rng.randrange(60), second=0, microsecond=0)

            query_drafts.append(_QueryDraftRec(
                persona_id=persona_id, text=qd.text, timestamp=q_ts,
                gold_context_ids=gold_ids, gold_tools=qd.tools,
                gold_plan=qd.plan))

    # Train/test split over a seeded shuffle of all queries.
    order = list(range(len(query_drafts)))
    rng.shuffle(order)
    n_train = round(len(query_drafts) * TRAIN_FRACTION)
    train_positions = set(order[:n_train])
    queries = [
        LabeledQuery(id=f"q-{idx:05d}", persona_id=d.persona_id, text=d.text,
                     timestamp=d.timestamp, gold_context_ids=d.gold_context_ids,
                     gold_tools=d.gold_tools, gold_plan=d.gold_plan,
                     split="train" if idx in train_positions else "test")
        for idx, d in enumerate(query_drafts)]

    epoch = (as_of - timedelta(days=window_days), as_of)
    return Corpus(personas=personas, stores=stores, toolbox=toolbox,
                  queries=queries, epoch=epoch)
