"""Run manifests: config snapshots and recomputable content hashes.

Every command output directory gets exactly one ``manifest.json``. Output
files are hashed individually; timestamps live only in the manifest itself,
which is excluded from the combined output hash so reruns with the same
inputs are byte-comparable.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

MANIFEST_FILE = "manifest.json"


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def dataset_hash(dataset_dir) -> str:
    """Combined hash of the dataset files, order-independent by name."""
    root = Path(dataset_dir)
    digest = hashlib.sha256()
    for path in sorted(p for p in root.iterdir()
                       if p.is_file() and p.name != MANIFEST_FILE):
        digest.update(path.name.encode("utf-8"))
        digest.update(bytes.fromhex(file_sha256(path)))
    return digest.hexdigest()


def output_hashes(out_dir) -> dict[str, str]:
    root = Path(out_dir)
    return {p.name: file_sha256(p)
            for p in sorted(root.iterdir())
            if p.is_file() and p.name != MANIFEST_FILE}


def combined_output_hash(out_dir) -> str:
    digest = hashlib.sha256()
    for name, digest_hex in sorted(output_hashes(out_dir).items()):
        digest.update(name.encode("utf-8"))
        digest.update(bytes.fromhex(digest_hex))
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    corpus_hash: str | None
    artifact_hashes: dict[str, str]
    tool_version: str
    started: str
    finished: str = ""

    @classmethod
    def begin(cls, command: str, config: dict,
              corpus_hash: str | None = None) -> "RunManifest":
        return cls(command=command, config=config, corpus_hash=corpus_hash,
                   artifact_hashes={}, tool_version=_tool_version(),
                   started=_now())

    def finish(self, out_dir) -> None:
        self.artifact_hashes = output_hashes(out_dir)
        self.finished = _now()

    def write(self, out_dir) -> None:
        path = Path(out_dir) / MANIFEST_FILE
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, ensure_ascii=False)
            fh.write("\n")


def read_manifest(out_dir) -> dict:
    with open(Path(out_dir) / MANIFEST_FILE, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _tool_version() -> str:
    try:
        from importlib.metadata import version
        return version("planrag")
    except Exception:
        return "0.1.0"
