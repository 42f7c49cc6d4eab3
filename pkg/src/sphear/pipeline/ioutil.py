"""Small file helpers shared by the pipeline: atomic writes, JSONL records."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def atomic_write_bytes(path: Path | str, data: bytes):
    """Write a file via a temp file in the same directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def dump_record(record: dict) -> str:
    """Deterministic single-line JSON encoding of one record."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_jsonl(path: Path | str, records: list[dict]):
    text = "".join(dump_record(r) + "\n" for r in records)
    atomic_write_bytes(path, text.encode("utf-8"))


def read_jsonl(path: Path | str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
