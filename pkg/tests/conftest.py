"""Shared fixtures: post builders and a local mock chat-completions server."""

from __future__ import annotations

import hashlib
import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from needscope.corpus import Post

DATA_DIR = Path(__file__).parent / "data"
SYNTHETIC_CORPUS = DATA_DIR / "synthetic_corpus.jsonl"

YEAR_TS = {2020: 1_590_000_000, 2021: 1_620_000_000, 2022: 1_650_000_000, 2023: 1_680_000_000}


def make_post(post_id="p1", author="alice", year=2023, text="Should I save more money this year?", subreddit="personalfinance"):
    return Post(post_id=post_id, author=author, created_at=YEAR_TS[year], subreddit=subreddit, text=text)


_QUERY_LINE = re.compile(r"^\d+\.\s", re.MULTILINE)


class _MockLlmHandler(BaseHTTPRequestHandler):
    """Returns deterministic schema-valid payloads keyed off the prompt text."""

    def log_message(self, *args):  # silence request logging
        pass

    def do_POST(self):
        server = self.server
        with server.lock:
            server.request_count += 1
            behavior = server.behaviors.pop(0) if server.behaviors else "ok"
        if behavior == "429":
            self.send_response(429)
            self.end_headers()
            return
        if behavior == "500":
            self.send_response(500)
            self.end_headers()
            return

        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length))
        prompt = body["messages"][0]["content"]

        if behavior == "invalid":
            payload = {"totally": "unexpected"}
        else:
            payload = self._payload_for(prompt)

        reply = {"choices": [{"message": {"content": json.dumps(payload)}}]}
        data = json.dumps(reply).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    @staticmethod
    def _payload_for(prompt: str) -> dict:
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:8]
        if '"core_query"' in prompt:
            additional = [f"secondary question {digest}"] if prompt.count("?") > 1 else []
            return {"core_query": f"how to handle question {digest}", "additional_queries": additional}
        if '"needs"' in prompt:
            n = max(1, len(_QUERY_LINE.findall(prompt)))
            purposes = ["emergency fund", "retirement", "debt management"]
            return {
                "needs": [
                    {"purpose": purposes[i % len(purposes)], "process": "saving"} for i in range(min(n, 3))
                ]
            }
        if '"nhf7"' in prompt:
            return {"nhf7": "safety_l1", "npf": "savings_emergencies"}
        if '"stress"' in prompt:
            return {"stress": "moderate", "risk": "calculative"}
        if '"fear"' in prompt:
            return {"fear": 1.0, "sadness": 0.0, "surprise": 0.0, "happiness": 0.0, "anger": 0.0}
        if '"ages"' in prompt:
            return {"ages": [30], "incomes": [{"amount": 5000, "period": "monthly"}]}
        raise AssertionError(f"mock server cannot classify prompt: {prompt[:120]}")


class MockLlmServer:
    def __init__(self):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _MockLlmHandler)
        self.httpd.request_count = 0
        self.httpd.behaviors = []
        self.httpd.lock = threading.Lock()
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base_url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    @property
    def request_count(self) -> int:
        return self.httpd.request_count

    def reset(self, behaviors: list[str] | None = None) -> None:
        with self.httpd.lock:
            self.httpd.request_count = 0
            self.httpd.behaviors = list(behaviors or [])

    def close(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture(scope="session")
def mock_llm_server():
    server = MockLlmServer()
    yield server
    server.close()


@pytest.fixture()
def rule_engine():
    from needscope.extraction import RuleEngine

    return RuleEngine()
