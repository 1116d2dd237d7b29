"""Run plumbing shared by the CLI: manifests and worker-count-independent
parallel mapping."""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
from typing import Callable, Iterable

TOOL_VERSION = "0.1.0"


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, subcommand: str, inputs: Iterable[str], config: dict):
    """Record everything needed to replay a run byte-for-byte."""
    manifest = {
        "tool_version": TOOL_VERSION,
        "subcommand": subcommand,
        "inputs": {os.fspath(p): file_sha256(p) for p in inputs},
        "config": config,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def ordered_map(fn: Callable, items: list, workers: int = 1, chunksize: int = 256) -> list:
    """Map preserving input order; results are identical for any worker
    count because every task is independent and order is restored."""
    if workers <= 1 or len(items) <= chunksize:
        return [fn(item) for item in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
