"""Turn eligible posts into need records via any engine."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

from ..corpus import Post
from ..errors import ExtractionError
from .engine import ExtractionEngine
from .types import EmotionProfile, NeedRecord, collapse_nhf7

log = logging.getLogger(__name__)


def extract_post(post: Post, engine: ExtractionEngine) -> tuple[list[NeedRecord], EmotionProfile]:
    """Extract 1..3 need records plus the post-level emotion profile."""
    summary = engine.summarize(post)
    labels = engine.extract_needs(summary)
    records: list[NeedRecord] = []
    for index, (query, label) in enumerate(zip(summary.queries, labels)):
        nhf7, npf = engine.map_hierarchy(label, summary)
        stress, risk = engine.assess_behavior(label, summary)
        records.append(
            NeedRecord(
                need_id=f"{post.post_id}:q{index}",
                post_id=post.post_id,
                user=post.author,
                year=post.year,
                label=label,
                nhf7=nhf7,
                nhf5=collapse_nhf7(nhf7),
                npf=npf,
                stress=stress,
                risk=risk,
                query=query,
                prompt_version=engine.version,
            )
        )
    return records, engine.score_emotion(post)


def extract_corpus(
    posts: Sequence[Post] | Iterable[Post],
    engine: ExtractionEngine,
    max_workers: int = 1,
) -> tuple[list[NeedRecord], dict[str, EmotionProfile]]:
    """Extract a whole corpus; output order follows post order regardless of workers."""
    posts = list(posts)
    if max_workers <= 1:
        results = [_extract_with_context(post, engine) for post in posts]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda p: _extract_with_context(p, engine), posts))
    records: list[NeedRecord] = []
    emotions: dict[str, EmotionProfile] = {}
    for post, (post_records, emotion) in zip(posts, results):
        records.extend(post_records)
        emotions[post.post_id] = emotion
    return records, emotions


def _extract_with_context(post: Post, engine: ExtractionEngine):
    try:
        return extract_post(post, engine)
    except ExtractionError:
        raise
    except Exception as exc:
        raise ExtractionError(f"extraction failed for post {post.post_id!r}: {exc}") from exc
