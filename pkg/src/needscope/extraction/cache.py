"""Append-only response cache for LLM calls.

One JSONL file per cache directory; records carry the key hash, schema id,
prompt version and validated payload. Reads are lock-free against the
in-memory index; appends are serialized, and per-key locks give single-flight
semantics so concurrent misses on one key do only one network call.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

CACHE_FILENAME = "llm_cache.jsonl"


def cache_key(schema_id: str, prompt: str, model: str, prompt_version: str) -> str:
    material = "\x00".join((schema_id, model, prompt_version, prompt))
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class ResponseCache:
    def __init__(self, directory: str | Path):
        self.path = Path(directory) / CACHE_FILENAME
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._index: dict[str, dict[str, Any]] = {}
        self._append_lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}
        self._key_locks_guard = threading.Lock()
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    self._index[record["key_hash"]] = record
                except (json.JSONDecodeError, KeyError):
                    log.warning("skipping corrupt cache line in %s", self.path)
        if self._index:
            log.debug("loaded %d cached responses from %s", len(self._index), self.path)

    def __len__(self) -> int:
        return len(self._index)

    def get(self, key_hash: str) -> dict[str, Any] | None:
        record = self._index.get(key_hash)
        return record["payload"] if record else None

    def put(self, key_hash: str, schema_id: str, prompt_version: str, payload: dict[str, Any]) -> None:
        record = {
            "key_hash": key_hash,
            "schema_id": schema_id,
            "prompt_version": prompt_version,
            "payload": payload,
            "timestamp": time.time(),
        }
        with self._append_lock:
            if key_hash in self._index:
                return
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
                fh.write("\n")
            self._index[key_hash] = record

    def key_lock(self, key_hash: str) -> threading.Lock:
        with self._key_locks_guard:
            return self._key_locks.setdefault(key_hash, threading.Lock())
