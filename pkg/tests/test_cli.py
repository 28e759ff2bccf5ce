"""Operator CLI: subcommands, exit codes, manifests, report merging."""
import json
import subprocess
import sys

import pytest

PLANRAG = [sys.executable, "-m", "planrag.cli"]


def _run(*args, cwd=None):
    return subprocess.run(PLANRAG + list(args), capture_output=True,
                          text=True, cwd=cwd)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    out = root / "ds"
    result = _run("gen-data", "--out", str(out), "--seed", "7",
                  "--n-personas", "25")
    assert result.returncode == 0, result.stderr
    return out


@pytest.fixture(scope="module")
def model_run(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-model") / "run"
    result = _run("train-ltr", "--dataset", str(dataset), "--out", str(out),
                  "--n-trees", "6", "--max-leaves", "7",
                  "--min-samples-leaf", "10")
    assert result.returncode == 0, result.stderr
    return out


class TestGenData:
    def test_outputs_and_manifest(self, dataset):
        for name in ("personas.jsonl", "context_items.jsonl", "toolbox.jsonl",
                     "queries.jsonl", "manifest.json"):
            assert (dataset / name).exists()
        manifest = json.loads((dataset / "manifest.json").read_text())
        assert manifest["command"] == "gen-data"
        assert manifest["config"]["seed"] == 7
        assert manifest["corpus_hash"]
        assert set(manifest["artifact_hashes"]) == {
            "personas.jsonl", "context_items.jsonl", "toolbox.jsonl",
            "queries.jsonl"}

    def test_invalid_flag_value_exits_2(self, tmp_path):
        result = _run("gen-data", "--out", str(tmp_path / "x"),
                      "--n-personas", "not-a-number")
        assert result.returncode == 2

    def test_invalid_window_exits_2(self, tmp_path):
        result = _run("gen-data", "--out", str(tmp_path / "x"),
                      "--n-personas", "3", "--window-days", "0")
        assert result.returncode == 2


class TestTrainLtr:
    def test_outputs(self, model_run):
        assert (model_run / "model.txt").exists()
        assert (model_run / "training_log.csv").exists()
        log = (model_run / "training_log.csv").read_text().splitlines()
        assert log[0] == "round,mean_train_ndcg"
        assert len(log) == 7  # header + 6 rounds

    def test_missing_dataset_exits_2(self, tmp_path):
        result = _run("train-ltr", "--dataset", str(tmp_path / "missing"),
                      "--out", str(tmp_path / "out"))
        assert result.returncode == 2

    def test_zero_trees_base_only(self, dataset, tmp_path):
        result = _run("train-ltr", "--dataset", str(dataset), "--out",
                      str(tmp_path / "zero"), "--n-trees", "0")
        assert result.returncode == 0, result.stderr
        header = json.loads((tmp_path / "zero" / "model.txt").read_text().splitlines()[0])
        assert header["n_trees"] == 0


class TestEval:
    def test_context_stage_table_shape(self, dataset, model_run, tmp_path):
        out = tmp_path / "ctx"
        result = _run("eval", "--dataset", str(dataset), "--out", str(out),
                      "--stage", "context", "--modes", "bm25,semantic,ltr-rrf",
                      "--k", "3,5,10", "--model", str(model_run / "model.txt"))
        assert result.returncode == 0, result.stderr
        header = (out / "report.csv").read_text().splitlines()[0]
        assert header == ("mode,recall@3,recall@5,recall@10,"
                          "ndcg@3,ndcg@5,ndcg@10")
        assert len((out / "report.csv").read_text().splitlines()) == 4

    def test_tools_stage_k_range_syntax(self, dataset, tmp_path):
        out = tmp_path / "tools"
        result = _run("eval", "--dataset", str(dataset), "--out", str(out),
                      "--stage", "tools", "--modes", "none,oracle",
                      "--k", "1..10")
        assert result.returncode == 0, result.stderr
        header = (out / "report.csv").read_text().splitlines()[0]
        assert header.split(",")[1:] == [f"tool_recall@{k}" for k in range(1, 11)]

    def test_e2e_stage_plan_columns(self, dataset, tmp_path):
        out = tmp_path / "e2e"
        result = _run("eval", "--dataset", str(dataset), "--out", str(out),
                      "--stage", "e2e", "--modes", "none,oracle", "--k", "5")
        assert result.returncode == 0, result.stderr
        header = (out / "report.csv").read_text().splitlines()[0]
        assert header.endswith("plan_acc,exact_match,hallucination")

    def test_unknown_mode_exits_2(self, dataset, tmp_path):
        result = _run("eval", "--dataset", str(dataset),
                      "--out", str(tmp_path / "x"), "--stage", "context",
                      "--modes", "psychic", "--k", "5")
        assert result.returncode == 2

    def test_ltr_mode_without_model_exits_2(self, dataset, tmp_path):
        result = _run("eval", "--dataset", str(dataset),
                      "--out", str(tmp_path / "x"), "--stage", "context",
                      "--modes", "ltr-rrf", "--k", "5")
        assert result.returncode == 2

    def test_precomputed_embeddings_drive_semantic_mode(self, dataset, tmp_path):
        # External embedding files plug in through --embeddings; write vectors
        # that align every query exactly with its first gold item.
        from planrag.corpus import load_corpus
        import numpy as np
        corpus = load_corpus(dataset)
        rng = np.random.default_rng(0)
        vec_of = {}
        item_file = tmp_path / "items.tsv"
        with open(item_file, "w", encoding="utf-8") as fh:
            for store in corpus.stores:
                for item in store.items:
                    vec = rng.normal(size=16)
                    vec_of[item.id] = vec / np.linalg.norm(vec)
                    fh.write(item.id + "\t" + ",".join(repr(float(v)) for v in vec) + "\n")
        query_file = tmp_path / "queries.tsv"
        with open(query_file, "w", encoding="utf-8") as fh:
            for query in corpus.queries:
                vec = vec_of[query.gold_context_ids[0]]
                fh.write(query.id + "\t" + ",".join(repr(float(v)) for v in vec) + "\n")
        out = tmp_path / "emb-eval"
        result = _run("eval", "--dataset", str(dataset), "--out", str(out),
                      "--stage", "context", "--modes", "semantic", "--k", "5",
                      "--embeddings", str(item_file),
                      "--query-embeddings", str(query_file))
        assert result.returncode == 0, result.stderr
        baseline_out = tmp_path / "emb-baseline"
        result = _run("eval", "--dataset", str(dataset), "--out",
                      str(baseline_out), "--stage", "context",
                      "--modes", "semantic", "--k", "5")
        assert result.returncode == 0, result.stderr

        def recall5(run_dir):
            row = (run_dir / "report.csv").read_text().splitlines()[1]
            return float(row.split(",")[1])

        # Perfectly aligned external vectors must beat the hashed baseline;
        # per-store rank ties still cap absolute recall under fuse-stores.
        assert recall5(out) > recall5(baseline_out)

    def test_manifest_hashes_recomputable(self, model_run):
        import hashlib
        manifest = json.loads((model_run / "manifest.json").read_text())
        for name, digest in manifest["artifact_hashes"].items():
            actual = hashlib.sha256((model_run / name).read_bytes()).hexdigest()
            assert actual == digest

    def test_config_file_fills_unset_flags(self, dataset, model_run, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"k_list": "3", "modes": "bm25"}))
        out = tmp_path / "cfgout"
        result = _run("eval", "--dataset", str(dataset), "--out", str(out),
                      "--stage", "context", "--modes", "semantic",
                      "--config", str(config))
        assert result.returncode == 0, result.stderr
        rows = (out / "report.csv").read_text().splitlines()
        # Explicit --modes beats the config file; unset --k comes from it.
        assert rows[0] == "mode,recall@3,ndcg@3"
        assert rows[1].startswith("semantic,")


class TestReport:
    def test_merges_runs_on_same_corpus(self, dataset, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out, modes in ((a, "bm25"), (b, "semantic")):
            result = _run("eval", "--dataset", str(dataset), "--out", str(out),
                          "--stage", "context", "--modes", modes, "--k", "5")
            assert result.returncode == 0, result.stderr
        merged = tmp_path / "merged"
        result = _run("report", str(a), str(b), "--out", str(merged))
        assert result.returncode == 0, result.stderr
        rows = (merged / "merged.csv").read_text().splitlines()
        assert len(rows) == 3
        assert rows[1].startswith("context,bm25")
        assert rows[2].startswith("context,semantic")

    def test_corpus_hash_mismatch_refused(self, dataset, tmp_path):
        other_ds = tmp_path / "ds2"
        assert _run("gen-data", "--out", str(other_ds), "--seed", "8",
                    "--n-personas", "10").returncode == 0
        a, b = tmp_path / "ra", tmp_path / "rb"
        assert _run("eval", "--dataset", str(dataset), "--out", str(a),
                    "--stage", "context", "--modes", "bm25", "--k", "5").returncode == 0
        assert _run("eval", "--dataset", str(other_ds), "--out", str(b),
                    "--stage", "context", "--modes", "bm25", "--k", "5").returncode == 0
        result = _run("report", str(a), str(b), "--out", str(tmp_path / "m"))
        assert result.returncode == 1
        assert "hash mismatch" in result.stderr

    def test_single_input_passthrough(self, dataset, tmp_path):
        a = tmp_path / "single"
        assert _run("eval", "--dataset", str(dataset), "--out", str(a),
                    "--stage", "context", "--modes", "bm25", "--k", "5").returncode == 0
        merged = tmp_path / "merged-single"
        assert _run("report", str(a), "--out", str(merged)).returncode == 0
        assert len((merged / "merged.csv").read_text().splitlines()) == 2
