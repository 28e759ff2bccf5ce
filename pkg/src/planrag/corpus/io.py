"""Line-delimited on-disk dataset format.

A dataset directory holds four UTF-8 JSONL files: personas.jsonl,
context_items.jsonl, toolbox.jsonl, and queries.jsonl. Context-item records
carry their owning persona_id so stores can be rebuilt on load; empty stores
are therefore not representable on disk. Timestamps are RFC 3339 strings.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

from ..errors import ParseError
from .model import (ContextItem, ContextStore, Corpus, LabeledQuery, Persona,
                    Plan, Tool, ToolParam, ensure_utc)

PERSONAS_FILE = "personas.jsonl"
ITEMS_FILE = "context_items.jsonl"
TOOLBOX_FILE = "toolbox.jsonl"
QUERIES_FILE = "queries.jsonl"

DATASET_FILES = (PERSONAS_FILE, ITEMS_FILE, TOOLBOX_FILE, QUERIES_FILE)


def format_timestamp(ts: datetime) -> str:
    return ensure_utc(ts).isoformat().replace("+00:00", "Z")


def parse_timestamp(raw: str) -> datetime:
    return datetime.fromisoformat(raw.replace("Z", "+00:00")).astimezone(timezone.utc)


def _dump(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def save_corpus(corpus: Corpus, path) -> None:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / PERSONAS_FILE, "w", encoding="utf-8") as fh:
        for p in corpus.personas:
            fh.write(_dump({"id": p.id, "attributes": p.attributes,
                            "app_usage_profile": p.app_usage_profile}) + "\n")
    with open(out / ITEMS_FILE, "w", encoding="utf-8") as fh:
        for store in corpus.stores:
            for item in store.items:
                fh.write(_dump({
                    "persona_id": store.persona_id,
                    "id": item.id,
                    "app": item.app,
                    "title": item.title,
                    "body": item.body,
                    "timestamp": format_timestamp(item.timestamp),
                    "categorical_tags": item.categorical_tags,
                    "access_count": item.access_count,
                }) + "\n")
    with open(out / TOOLBOX_FILE, "w", encoding="utf-8") as fh:
        for tool in corpus.toolbox:
            fh.write(_dump({
                "name": tool.name,
                "app": tool.app,
                "description": tool.description,
                "params": [{"name": p.name, "description": p.description,
                            "required": p.required} for p in tool.params],
            }) + "\n")
    with open(out / QUERIES_FILE, "w", encoding="utf-8") as fh:
        for q in corpus.queries:
            fh.write(_dump({
                "id": q.id,
                "persona_id": q.persona_id,
                "text": q.text,
                "timestamp": format_timestamp(q.timestamp),
                "gold_context_ids": list(q.gold_context_ids),
                "gold_tools": list(q.gold_tools),
                "gold_plan": {"api": q.gold_plan.api, "args": q.gold_plan.args},
                "split": q.split,
            }) + "\n")


def _records(path: Path):
    if not path.exists():
        raise ParseError("file not found", path=str(path))
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}",
                                 path=str(path), line=lineno) from exc


def _need(record: dict, field: str, path: Path, lineno: int):
    if field not in record:
        raise ParseError("missing field", path=str(path), line=lineno, field=field)
    return record[field]


def load_corpus(path) -> Corpus:
    root = Path(path)

    personas: list[Persona] = []
    ppath = root / PERSONAS_FILE
    for lineno, rec in _records(ppath):
        personas.append(Persona(
            id=str(_need(rec, "id", ppath, lineno)),
            attributes=dict(_need(rec, "attributes", ppath, lineno)),
            app_usage_profile={k: float(v) for k, v in
                               _need(rec, "app_usage_profile", ppath, lineno).items()}))

    ipath = root / ITEMS_FILE
    grouped: dict[tuple[str, str], list[ContextItem]] = {}
    seen_ids: dict[str, set[str]] = {}
    for lineno, rec in _records(ipath):
        persona_id = str(_need(rec, "persona_id", ipath, lineno))
        item_id = str(_need(rec, "id", ipath, lineno))
        known = seen_ids.setdefault(persona_id, set())
        if item_id in known:
            raise ParseError(f"duplicate item id {item_id!r} for persona {persona_id}",
                             path=str(ipath), line=lineno, field="id")
        known.add(item_id)
        try:
            ts = parse_timestamp(str(_need(rec, "timestamp", ipath, lineno)))
        except ValueError as exc:
            raise ParseError(f"bad timestamp: {exc}", path=str(ipath),
                             line=lineno, field="timestamp") from exc
        access = int(_need(rec, "access_count", ipath, lineno))
        if access < 0:
            raise ParseError("access_count must be >= 0", path=str(ipath),
                             line=lineno, field="access_count")
        item = ContextItem(
            id=item_id,
            app=str(_need(rec, "app", ipath, lineno)),
            title=str(_need(rec, "title", ipath, lineno)),
            body=str(_need(rec, "body", ipath, lineno)),
            timestamp=ts,
            categorical_tags={str(k): str(v) for k, v in
                              _need(rec, "categorical_tags", ipath, lineno).items()},
            access_count=access)
        grouped.setdefault((persona_id, item.app), []).append(item)
    stores = [ContextStore(persona_id=pid, app=app, items=tuple(items))
              for (pid, app), items in grouped.items()]

    tpath = root / TOOLBOX_FILE
    toolbox: list[Tool] = []
    for lineno, rec in _records(tpath):
        params = tuple(
            ToolParam(name=str(p["name"]), description=str(p.get("description", "")),
                      required=bool(p["required"]))
            for p in _need(rec, "params", tpath, lineno))
        toolbox.append(Tool(
            name=str(_need(rec, "name", tpath, lineno)),
            app=str(_need(rec, "app", tpath, lineno)),
            description=str(_need(rec, "description", tpath, lineno)),
            params=params))

    qpath = root / QUERIES_FILE
    queries: list[LabeledQuery] = []
    for lineno, rec in _records(qpath):
        plan_rec = _need(rec, "gold_plan", qpath, lineno)
        if "api" not in plan_rec:
            raise ParseError("missing field", path=str(qpath), line=lineno,
                             field="gold_plan.api")
        try:
            ts = parse_timestamp(str(_need(rec, "timestamp", qpath, lineno)))
        except ValueError as exc:
            raise ParseError(f"bad timestamp: {exc}", path=str(qpath),
                             line=lineno, field="timestamp") from exc
        queries.append(LabeledQuery(
            id=str(_need(rec, "id", qpath, lineno)),
            persona_id=str(_need(rec, "persona_id", qpath, lineno)),
            text=str(_need(rec, "text", qpath, lineno)),
            timestamp=ts,
            gold_context_ids=tuple(str(g) for g in
                                   _need(rec, "gold_context_ids", qpath, lineno)),
            gold_tools=tuple(str(t) for t in _need(rec, "gold_tools", qpath, lineno)),
            gold_plan=Plan(api=str(plan_rec["api"]),
                           args={str(k): str(v)
                                 for k, v in plan_rec.get("args", {}).items()}),
            split=str(_need(rec, "split", qpath, lineno))))

    return Corpus(personas=personas, stores=stores, toolbox=toolbox, queries=queries)
