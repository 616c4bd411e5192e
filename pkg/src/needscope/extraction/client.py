"""HTTP client for an OpenAI-compatible chat-completions endpoint.

Every call is cached by (schema id, prompt content hash, model, prompt
version); a cache hit never touches the network. Transient failures (429 and
5xx) get bounded exponential backoff with jitter; a schema-invalid reply is
re-asked once with a corrective suffix and then rejected.
"""

from __future__ import annotations

import json
import logging
import os
import random
import threading
import time
from typing import Any

import httpx

from ..errors import ConfigError, ExtractionError, SchemaValidationError
from .cache import ResponseCache, cache_key
from .prompts import CORRECTIVE_SUFFIX, PROMPT_VERSION
from .schemas import validate_payload
from .types import EngineConfig

log = logging.getLogger(__name__)

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class TokenBucket:
    """Simple thread-safe rate limiter: ``rate`` permits per second."""

    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = max(rate, 0.001)
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


class LlmClient:
    """Schema-validated, cached access to one chat-completions endpoint."""

    def __init__(
        self,
        config: EngineConfig,
        cache: ResponseCache | None = None,
        prompt_version: str = PROMPT_VERSION,
    ):
        if not config.base_url:
            raise ConfigError("LLM engine requires an endpoint base URL")
        self.config = config
        self.cache = cache
        self.prompt_version = prompt_version
        self._bucket = TokenBucket(config.requests_per_second)
        api_key = os.environ.get(config.api_key_env, "")
        self._http = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            timeout=config.timeout,
            headers={"Authorization": f"Bearer {api_key}"} if api_key else {},
        )
        self.network_calls = 0
        self._stats_lock = threading.Lock()

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "LlmClient":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def llm_call(self, prompt: str, schema_id: str, post_id: str | None = None) -> dict[str, Any]:
        """Return the validated payload for a prompt, from cache when warm."""
        key = cache_key(schema_id, prompt, self.config.model, self.prompt_version)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
            with self.cache.key_lock(key):
                cached = self.cache.get(key)
                if cached is not None:
                    return cached
                payload = self._call_and_validate(prompt, schema_id, post_id)
                self.cache.put(key, schema_id, self.prompt_version, payload)
                return payload
        return self._call_and_validate(prompt, schema_id, post_id)

    def _call_and_validate(self, prompt: str, schema_id: str, post_id: str | None) -> dict[str, Any]:
        raw = self._post_with_retry(prompt, post_id)
        try:
            return validate_payload(schema_id, json.loads(raw), post_id=post_id)
        except (SchemaValidationError, json.JSONDecodeError) as first_error:
            log.warning("schema-invalid reply for %s (%s); re-asking once", post_id, schema_id)
            retry_prompt = prompt + CORRECTIVE_SUFFIX.format(error=first_error)
            raw = self._post_with_retry(retry_prompt, post_id)
            try:
                return validate_payload(schema_id, json.loads(raw), post_id=post_id)
            except json.JSONDecodeError as exc:
                raise SchemaValidationError(
                    f"reply is not JSON after re-ask: {exc}", raw_payload=raw, post_id=post_id
                ) from exc

    def _post_with_retry(self, prompt: str, post_id: str | None) -> str:
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
            "response_format": {"type": "json_object"},
        }
        last_error: str = ""
        for attempt in range(self.config.max_attempts):
            if attempt:
                delay = min(self.config.backoff_cap, self.config.backoff_base * 2 ** (attempt - 1))
                time.sleep(delay * (0.5 + random.random() / 2))
            self._bucket.acquire()
            with self._stats_lock:
                self.network_calls += 1
            try:
                response = self._http.post("/chat/completions", json=body)
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                log.warning("post %s: %s (attempt %d)", post_id, last_error, attempt + 1)
                continue
            if response.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {response.status_code}"
                log.warning("post %s: %s, backing off (attempt %d)", post_id, last_error, attempt + 1)
                continue
            if response.status_code != 200:
                raise ExtractionError(
                    f"endpoint returned HTTP {response.status_code} for post {post_id!r}: {response.text[:200]}"
                )
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, json.JSONDecodeError) as exc:
                raise ExtractionError(f"malformed completion envelope for post {post_id!r}: {exc}") from exc
        raise ExtractionError(
            f"giving up after {self.config.max_attempts} attempts for post {post_id!r} ({last_error})"
        )
