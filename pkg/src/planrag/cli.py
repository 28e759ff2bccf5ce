"""Operator command line: gen-data, train-ltr, eval, report.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Flags win over config-file values, which win over defaults; the effective
configuration is snapshotted into each run's manifest.
"""
from __future__ import annotations

import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import corpus as corpus_mod
from .corpus.generate import DEFAULT_EPOCH_START
from .errors import ConfigurationError, PlanragError, ReportError
from .fusion import build_artifacts, artifacts_with_precomputed
from .ltr import (LtrConfig, load_model, save_model, save_training_log, train)
from .manifest import RunManifest, dataset_hash, read_manifest
from .metrics import (PLAN_METRIC_NAMES, render_csv, render_table,
                      retrieval_metric_names)
from .pipeline import evaluate_context, evaluate_e2e, evaluate_tools
from .retrieval import load_embeddings
from .training_data import build_training_groups

_STAGES = ("context", "tools", "e2e")


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _apply_config_file(ctx: click.Context, config_path: str | None) -> None:
    """Config-file values fill in params the user did not set explicitly."""
    if not config_path:
        return
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config file {config_path}: {exc}")
    if not isinstance(values, dict):
        raise ConfigurationError("config file must hold a JSON object")
    for key, value in values.items():
        param = key.replace("-", "_")
        if param not in ctx.params:
            raise ConfigurationError(f"unknown config key {key!r}")
        source = ctx.get_parameter_source(param)
        if source == click.core.ParameterSource.DEFAULT:
            ctx.params[param] = value


def _parse_k_list(raw: str) -> list[int]:
    """Accepts "1,3,5,10" and range syntax "1..10"."""
    ks: list[int] = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            ks.extend(range(int(lo), int(hi) + 1))
        else:
            ks.append(int(part))
    if not ks or any(k < 1 for k in ks):
        raise ConfigurationError(f"invalid k list {raw!r}")
    return sorted(set(ks))


def _load_dataset(dataset: str):
    corpus = corpus_mod.load_corpus(dataset)
    violations = corpus_mod.validate_corpus(corpus)
    if violations:
        suffix = f" (+{len(violations) - 1} more)" if len(violations) > 1 else ""
        raise ConfigurationError(
            f"dataset {dataset} is invalid: {violations[0]}{suffix}")
    return corpus


def _make_artifacts(corpus, dims, model_path, embeddings, query_embeddings):
    model = load_model(model_path) if model_path else None
    if embeddings:
        if not query_embeddings:
            raise ConfigurationError(
                "--embeddings also requires --query-embeddings")
        return artifacts_with_precomputed(
            corpus, load_embeddings(embeddings), load_embeddings(query_embeddings),
            ltr_model=model)
    return build_artifacts(corpus, dims=dims, ltr_model=model)


@click.group()
def cli() -> None:
    """Context-aware retrieval, ranking, and planner evaluation."""


@cli.command("gen-data")
@click.option("--out", required=True, type=click.Path(), help="Output dataset directory.")
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--n-personas", default=791, show_default=True, type=int)
@click.option("--epoch-start", default=DEFAULT_EPOCH_START.isoformat(),
              show_default=True, help="Corpus 'as of' moment (RFC 3339).")
@click.option("--window-days", default=15, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.pass_context
def cmd_gen_data(ctx, out, seed, n_personas, epoch_start, window_days, config_path):
    """Generate a synthetic dataset and validate its invariants."""
    _apply_config_file(ctx, config_path)
    p = ctx.params
    try:
        epoch = datetime.fromisoformat(str(p["epoch_start"]).replace("Z", "+00:00"))
        if epoch.tzinfo is None:
            epoch = epoch.replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise ConfigurationError(f"bad --epoch-start: {exc}")
    manifest = RunManifest.begin("gen-data", {
        "seed": p["seed"], "n_personas": p["n_personas"],
        "epoch_start": epoch.isoformat(), "window_days": p["window_days"]})
    corpus = corpus_mod.generate_corpus(p["seed"], p["n_personas"], epoch,
                                        p["window_days"])
    violations = corpus_mod.validate_corpus(corpus)
    if violations:
        for v in violations[:20]:
            click.echo(f"violation: {v}", err=True)
        _fail(f"generated corpus failed validation with {len(violations)} violations", 1)
    corpus_mod.save_corpus(corpus, p["out"])
    manifest.corpus_hash = dataset_hash(p["out"])
    manifest.finish(p["out"])
    manifest.write(p["out"])
    click.echo(f"wrote {len(corpus.personas)} personas, "
               f"{sum(len(s.items) for s in corpus.stores)} items, "
               f"{len(corpus.queries)} queries to {p['out']}")


@cli.command("train-ltr")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--n-trees", default=300, show_default=True, type=int)
@click.option("--learning-rate", default=0.1, show_default=True, type=float)
@click.option("--sigma", default=1.0, show_default=True, type=float)
@click.option("--max-leaves", default=31, show_default=True, type=int)
@click.option("--min-samples-leaf", default=None, type=int,
              help="Default: max(20, 1% of rows).")
@click.option("--ndcg-cutoff", default=10, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--dims", default=1024, show_default=True, type=int)
@click.option("--max-queries", default=None, type=int,
              help="Train on only the first N train queries (quick runs).")
@click.option("--threads", default=1, show_default=True, type=int,
              help="Reserved; training runs single-threaded for determinism.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.pass_context
def cmd_train_ltr(ctx, dataset, out, n_trees, learning_rate, sigma, max_leaves,
                  min_samples_leaf, ndcg_cutoff, seed, dims, max_queries,
                  threads, config_path):
    """Extract features for the train split and fit the ranker."""
    _apply_config_file(ctx, config_path)
    p = ctx.params
    corpus = _load_dataset(p["dataset"])
    config = LtrConfig(n_trees=p["n_trees"], learning_rate=p["learning_rate"],
                       sigma=p["sigma"], max_leaves=p["max_leaves"],
                       min_samples_leaf=p["min_samples_leaf"],
                       ndcg_cutoff=p["ndcg_cutoff"], seed=p["seed"])
    manifest = RunManifest.begin("train-ltr", {
        "dataset": str(p["dataset"]), "dims": p["dims"],
        "max_queries": p["max_queries"], "threads": p["threads"],
        **{k: getattr(config, k) for k in
           ("n_trees", "learning_rate", "sigma", "max_leaves",
            "min_samples_leaf", "ndcg_cutoff", "seed")}},
        corpus_hash=dataset_hash(p["dataset"]))
    artifacts = build_artifacts(corpus, dims=p["dims"])
    groups = build_training_groups(corpus, artifacts, split="train",
                                   max_queries=p["max_queries"])
    model, history = train(groups, config)
    out_dir = Path(p["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    save_model(model, out_dir / "model.txt")
    save_training_log(history, out_dir / "training_log.csv")
    manifest.finish(out_dir)
    manifest.write(out_dir)
    final = history[-1] if history else float("nan")
    click.echo(f"trained {len(model.trees)} trees on {len(groups)} groups; "
               f"final mean train NDCG@{config.ndcg_cutoff} = {final:.4f}")


@cli.command("eval")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--stage", required=True, type=click.Choice(_STAGES))
@click.option("--modes", required=True,
              help="Comma-separated retrieval modes or e2e presets.")
@click.option("--k", "k_list", default="1,3,5,10", show_default=True,
              help="K values; commas and ranges (1..10) accepted.")
@click.option("--split", default="test", show_default=True,
              type=click.Choice(("train", "test")))
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--dims", default=1024, show_default=True, type=int)
@click.option("--rrf-k", default=60.0, show_default=True, type=float)
@click.option("--k-context", default=5, show_default=True, type=int)
@click.option("--embeddings", type=click.Path(exists=True), default=None,
              help="Precomputed item embeddings (id<TAB>v1,v2,...).")
@click.option("--query-embeddings", type=click.Path(exists=True), default=None)
@click.option("--threads", default=1, show_default=True, type=int,
              help="Reserved; evaluation runs single-threaded for determinism.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.pass_context
def cmd_eval(ctx, dataset, out, stage, modes, k_list, split, model_path, dims,
             rrf_k, k_context, embeddings, query_embeddings, threads, config_path):
    """Evaluate retrieval stages or the end-to-end pipeline."""
    _apply_config_file(ctx, config_path)
    p = ctx.params
    corpus = _load_dataset(p["dataset"])
    mode_list = [m.strip() for m in str(p["modes"]).split(",") if m.strip()]
    if not mode_list:
        raise ConfigurationError("no modes given")
    ks = _parse_k_list(p["k_list"])
    manifest = RunManifest.begin("eval", {
        "dataset": str(p["dataset"]), "stage": p["stage"], "modes": mode_list,
        "k": ks, "split": p["split"], "model": p["model_path"],
        "dims": p["dims"], "rrf_k": p["rrf_k"], "k_context": p["k_context"],
        "threads": p["threads"]},
        corpus_hash=dataset_hash(p["dataset"]))
    artifacts = _make_artifacts(corpus, p["dims"], p["model_path"],
                                p["embeddings"], p["query_embeddings"])

    if p["stage"] == "context":
        rows = evaluate_context(corpus, p["split"], mode_list, ks, artifacts,
                                rrf_k=p["rrf_k"])
        columns = retrieval_metric_names(ks)
        label = "mode"
    elif p["stage"] == "tools":
        rows = evaluate_tools(corpus, p["split"], mode_list, ks, artifacts,
                              k_context=p["k_context"], rrf_k=p["rrf_k"],
                              dims=p["dims"])
        columns = [f"tool_recall@{k}" for k in ks]
        label = "context"
    else:
        rows = evaluate_e2e(corpus, p["split"], mode_list, artifacts,
                            dims=p["dims"])
        columns = ([f"recall@{k}" for k in ks if k in (1, 3, 5, 10)]
                   + [f"tool_recall@{k}" for k in ks if k in (1, 3, 5, 10)]
                   + PLAN_METRIC_NAMES)
        label = "setting"

    out_dir = Path(p["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    table = render_table(rows, columns, label=label)
    (out_dir / "report.txt").write_text(table, encoding="utf-8")
    (out_dir / "report.csv").write_text(
        render_csv(rows, columns, label=label), encoding="utf-8")
    manifest.finish(out_dir)
    manifest.write(out_dir)
    click.echo(table, nl=False)


@cli.command("report")
@click.argument("runs", nargs=-1, required=True,
                type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path())
def cmd_report(runs, out):
    """Merge eval run CSVs; refuses when corpus hashes differ."""
    merged_rows: list[dict] = []
    columns: list[str] = []
    hashes = set()
    for run_dir in runs:
        meta = read_manifest(run_dir)
        hashes.add(meta.get("corpus_hash"))
        if len(hashes) > 1:
            raise ReportError("corpus hash mismatch across runs; refusing to merge")
        stage = meta.get("config", {}).get("stage", "?")
        csv_path = Path(run_dir) / "report.csv"
        with open(csv_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            label = reader.fieldnames[0]
            for col in reader.fieldnames[1:]:
                if col not in columns:
                    columns.append(col)
            for row in reader:
                merged_rows.append({"stage": stage, "setting": row[label],
                                    **{k: v for k, v in row.items() if k != label}})
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["stage", "setting"] + columns
    with open(out_dir / "merged.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in merged_rows:
            writer.writerow([row.get(col, "") for col in header])
    widths = [max(len(str(r.get(c, ""))) for r in merged_rows + [dict(zip(header, header))])
              for c in header]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in merged_rows:
        lines.append("  ".join(str(row.get(c, "")).ljust(w)
                               for c, w in zip(header, widths)).rstrip())
    (out_dir / "merged.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"merged {len(merged_rows)} rows from {len(runs)} runs into {out}")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(2)
    except ConfigurationError as exc:
        _fail(str(exc), 2)
    except PlanragError as exc:
        _fail(str(exc), 1)


if __name__ == "__main__":
    main()
