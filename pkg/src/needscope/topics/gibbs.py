"""Collapsed Gibbs sampling for LDA.

Per-token resampling uses the standard collapsed conditional

    P(z = t) ∝ (n_dt + alpha) * (n_tw + beta) / (n_t + V * beta)

with the current token excluded from all counts. A fixed seed makes the
model bit-reproducible: all randomness (initial assignments and per-sweep
uniform draws) comes from one numpy PCG64 generator consumed in a fixed
order, and the numba kernel only transforms those draws.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from numba import njit

from ..errors import ModelingError
from .tokenize import TokenizedCorpus

log = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


@dataclass(slots=True)
class LdaModel:
    k: int
    alpha: float
    beta: float
    seed: int
    iterations: int
    average_last: int
    tokenizer_version: str
    vocabulary: list[str]
    need_ids: list[str]
    token_words: np.ndarray  # (N,) int32
    token_docs: np.ndarray  # (N,) int32
    assignments: np.ndarray  # (N,) int32
    doc_topic: np.ndarray  # (D, k) int64
    topic_word: np.ndarray  # (k, V) int64
    topic_totals: np.ndarray  # (k,) int64
    doc_lengths: np.ndarray  # (D,) int64
    theta_avg: np.ndarray | None = None  # (D, k) float64
    phi_avg: np.ndarray | None = None  # (k, V) float64

    @property
    def n_docs(self) -> int:
        return len(self.need_ids)

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    def point_theta(self) -> np.ndarray:
        """Smoothed doc-topic distributions from the current counts."""
        theta = (self.doc_topic + self.alpha) / (self.doc_lengths[:, None] + self.k * self.alpha)
        return theta

    def point_phi(self) -> np.ndarray:
        """Smoothed topic-word distributions from the current counts."""
        return (self.topic_word + self.beta) / (self.topic_totals[:, None] + self.vocab_size * self.beta)

    def theta(self) -> np.ndarray:
        """Averaged theta when burn-in averaging was enabled, else the point estimate."""
        return self.theta_avg if self.theta_avg is not None else self.point_theta()

    def phi(self) -> np.ndarray:
        return self.phi_avg if self.phi_avg is not None else self.point_phi()

    def top_words(self, topic: int, n: int = 10) -> list[str]:
        order = np.argsort(-self.topic_word[topic], kind="stable")[:n]
        return [self.vocabulary[i] for i in order]


@dataclass(frozen=True, slots=True)
class TopicDistribution:
    need_id: str
    probs: np.ndarray
    dominant_topic: int


@njit(cache=True)
def _sweep(token_words, token_docs, assignments, doc_topic, topic_word, topic_totals, alpha, beta, uniforms, probs):
    n_tokens = token_words.shape[0]
    k = topic_word.shape[0]
    vbeta = beta * topic_word.shape[1]
    for i in range(n_tokens):
        w = token_words[i]
        d = token_docs[i]
        t = assignments[i]
        doc_topic[d, t] -= 1
        topic_word[t, w] -= 1
        topic_totals[t] -= 1
        total = 0.0
        for tt in range(k):
            p = (doc_topic[d, tt] + alpha) * (topic_word[tt, w] + beta) / (topic_totals[tt] + vbeta)
            probs[tt] = p
            total += p
        r = uniforms[i] * total
        acc = 0.0
        new_t = k - 1
        for tt in range(k):
            acc += probs[tt]
            if r < acc:
                new_t = tt
                break
        assignments[i] = new_t
        doc_topic[d, new_t] += 1
        topic_word[new_t, w] += 1
        topic_totals[new_t] += 1


def gibbs_train(
    corpus: TokenizedCorpus,
    k: int,
    alpha: float,
    beta: float,
    iterations: int,
    seed: int,
    average_last: int = 0,
    on_sweep: Callable[[int, LdaModel], None] | None = None,
    tokenizer_version: str = "tok-1",
) -> LdaModel:
    """Train one chain and return the model after the final sweep.

    ``average_last`` > 0 additionally averages theta/phi over that many final
    sweeps. ``on_sweep(sweep_index, model)`` is invoked after every sweep
    with the live model (read-only use) for diagnostics and invariant checks.
    """
    if k < 2:
        raise ModelingError(f"k must be >= 2, got {k}")
    if alpha <= 0 or beta <= 0:
        raise ModelingError(f"priors must be positive (alpha={alpha}, beta={beta})")
    if iterations < 1:
        raise ModelingError(f"iterations must be >= 1, got {iterations}")
    if not corpus.needs:
        raise ModelingError("no modeled needs: corpus is empty after preprocessing")
    if k > len(corpus.needs):
        raise ModelingError(f"k={k} exceeds the {len(corpus.needs)} modeled needs")
    if average_last < 0 or average_last > iterations:
        raise ModelingError(f"average_last must be in [0, iterations], got {average_last}")

    token_words = np.fromiter(
        (w for need in corpus.needs for w in need.tokens), dtype=np.int32, count=corpus.n_tokens
    )
    token_docs = np.fromiter(
        (d for d, need in enumerate(corpus.needs) for _ in need.tokens), dtype=np.int32, count=corpus.n_tokens
    )
    n_tokens = token_words.shape[0]
    n_docs = len(corpus.needs)
    vocab_size = corpus.vocab_size

    rng = np.random.Generator(np.random.PCG64(seed))
    assignments = rng.integers(0, k, size=n_tokens, dtype=np.int32)

    doc_topic = np.zeros((n_docs, k), dtype=np.int64)
    topic_word = np.zeros((k, vocab_size), dtype=np.int64)
    topic_totals = np.zeros(k, dtype=np.int64)
    np.add.at(doc_topic, (token_docs, assignments), 1)
    np.add.at(topic_word, (assignments, token_words), 1)
    np.add.at(topic_totals, assignments, 1)
    doc_lengths = np.bincount(token_docs, minlength=n_docs).astype(np.int64)

    model = LdaModel(
        k=k,
        alpha=float(alpha),
        beta=float(beta),
        seed=int(seed),
        iterations=int(iterations),
        average_last=int(average_last),
        tokenizer_version=tokenizer_version,
        vocabulary=list(corpus.vocabulary),
        need_ids=[need.need_id for need in corpus.needs],
        token_words=token_words,
        token_docs=token_docs,
        assignments=assignments,
        doc_topic=doc_topic,
        topic_word=topic_word,
        topic_totals=topic_totals,
        doc_lengths=doc_lengths,
    )

    probs = np.empty(k, dtype=np.float64)
    theta_acc = np.zeros((n_docs, k), dtype=np.float64) if average_last else None
    phi_acc = np.zeros((k, vocab_size), dtype=np.float64) if average_last else None
    first_averaged = iterations - average_last

    for sweep in range(iterations):
        uniforms = rng.random(n_tokens)
        _sweep(
            token_words, token_docs, assignments,
            doc_topic, topic_word, topic_totals,
            float(alpha), float(beta), uniforms, probs,
        )
        if theta_acc is not None and sweep >= first_averaged:
            theta_acc += model.point_theta()
            phi_acc += model.point_phi()
        if on_sweep is not None:
            on_sweep(sweep, model)

    if theta_acc is not None:
        model.theta_avg = theta_acc / average_last
        model.phi_avg = phi_acc / average_last

    # must be impossible by construction; guards against count-update bugs
    assert int(topic_totals.sum()) == n_tokens, "token count drifted during sampling"
    assert np.isfinite(model.theta()).all() and np.isfinite(model.phi()).all()
    return model


def infer_distributions(model: LdaModel, averaged: bool = True) -> list[TopicDistribution]:
    """Per-need topic distributions; dominant topic is argmax with ties to the lowest index."""
    theta = model.theta() if averaged else model.point_theta()
    return [
        TopicDistribution(need_id=need_id, probs=theta[d], dominant_topic=int(np.argmax(theta[d])))
        for d, need_id in enumerate(model.need_ids)
    ]


def dominant_topic_assignment(dists: list[TopicDistribution]) -> dict[str, int]:
    return {dist.need_id: dist.dominant_topic for dist in dists}


def save_model(model: LdaModel, path: str | Path) -> None:
    """Persist the model; loading reproduces theta/phi exactly."""
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "k": model.k,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "iterations": model.iterations,
        "average_last": model.average_last,
        "tokenizer_version": model.tokenizer_version,
        "vocab_size": model.vocab_size,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {
        "header": np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8),
        "vocabulary": np.array(model.vocabulary, dtype=object),
        "need_ids": np.array(model.need_ids, dtype=object),
        "token_words": model.token_words,
        "token_docs": model.token_docs,
        "assignments": model.assignments,
        "doc_topic": model.doc_topic,
        "topic_word": model.topic_word,
        "topic_totals": model.topic_totals,
        "doc_lengths": model.doc_lengths,
    }
    if model.theta_avg is not None:
        arrays["theta_avg"] = model.theta_avg
        arrays["phi_avg"] = model.phi_avg
    with path.open("wb") as fh:
        np.savez_compressed(fh, **arrays, allow_pickle=True)


def load_model(path: str | Path) -> LdaModel:
    with np.load(Path(path), allow_pickle=True) as data:
        header = json.loads(bytes(data["header"]).decode("utf-8"))
        if header.get("format_version") != MODEL_FORMAT_VERSION:
            raise ModelingError(f"unsupported model format: {header.get('format_version')}")
        return LdaModel(
            k=header["k"],
            alpha=header["alpha"],
            beta=header["beta"],
            seed=header["seed"],
            iterations=header["iterations"],
            average_last=header["average_last"],
            tokenizer_version=header["tokenizer_version"],
            vocabulary=[str(v) for v in data["vocabulary"]],
            need_ids=[str(v) for v in data["need_ids"]],
            token_words=data["token_words"],
            token_docs=data["token_docs"],
            assignments=data["assignments"],
            doc_topic=data["doc_topic"],
            topic_word=data["topic_word"],
            topic_totals=data["topic_totals"],
            doc_lengths=data["doc_lengths"],
            theta_avg=data["theta_avg"] if "theta_avg" in data else None,
            phi_avg=data["phi_avg"] if "phi_avg" in data else None,
        )
