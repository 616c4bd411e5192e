"""Corpus ingestion: parse raw post dumps and apply user/post eligibility filters.

Input dumps are line-delimited JSON records with the fields ``id``, ``author``,
``created_utc`` (integer seconds UTC), ``subreddit``, ``title`` and
``selftext`` (the body, possibly empty). Title and body are joined with a
single newline to form the post text; when one of them is empty the text is
just the other, which makes serialize/parse a lossless round trip.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, Mapping

from .errors import ConfigError, IngestError

log = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "author", "created_utc", "subreddit", "title", "selftext")


@dataclass(frozen=True, slots=True)
class Post:
    """One social-media submission."""

    post_id: str
    author: str
    created_at: int  # UTC seconds
    subreddit: str
    text: str

    @property
    def year(self) -> int:
        return datetime.fromtimestamp(self.created_at, tz=timezone.utc).year


@dataclass(frozen=True, slots=True)
class CorpusStats:
    total_posts: int
    eligible_posts: int
    total_users: int
    eligible_users: int
    posts_per_user_mean: float

    def as_dict(self) -> dict:
        return {
            "total_posts": self.total_posts,
            "eligible_posts": self.eligible_posts,
            "total_users": self.total_users,
            "eligible_users": self.eligible_users,
            "posts_per_user_mean": self.posts_per_user_mean,
        }


@dataclass(slots=True)
class RejectReport:
    """Per-line rejects collected while parsing a dump."""

    rejects: list[dict]

    def add(self, line_no: int, reason: str) -> None:
        self.rejects.append({"line_no": line_no, "reason": reason})

    def __len__(self) -> int:
        return len(self.rejects)


def join_title_body(title: str, body: str) -> str:
    """Join title and body with a single newline, skipping empty parts."""
    if title and body:
        return f"{title}\n{body}"
    return title or body


def parse_dump(
    stream: IO[str] | Iterable[str],
    rejects: RejectReport | None = None,
    seen_ids: set[str] | None = None,
) -> Iterator[Post]:
    """Parse a line-delimited dump into posts, in input order.

    Malformed lines are recorded in ``rejects`` and skipped, never fatal.
    Posts with an already-seen ``post_id`` are skipped (first occurrence
    wins); pass ``seen_ids`` to dedupe across several shards.
    """
    if rejects is None:
        rejects = RejectReport([])
    if seen_ids is None:
        seen_ids = set()
    try:
        iterator = iter(stream)
    except TypeError as exc:  # pragma: no cover - defensive
        raise IngestError(f"unreadable stream: {exc}") from exc

    line_no = 0
    while True:
        try:
            line = next(iterator)
        except StopIteration:
            return
        except (OSError, UnicodeDecodeError) as exc:
            raise IngestError(f"unreadable stream at line {line_no + 1}: {exc}") from exc
        line_no += 1
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            rejects.add(line_no, f"invalid json: {exc.msg}")
            continue
        if not isinstance(record, dict):
            rejects.add(line_no, "record is not an object")
            continue
        missing = [f for f in REQUIRED_FIELDS if f not in record]
        if missing:
            rejects.add(line_no, f"missing required field(s): {', '.join(missing)}")
            continue
        try:
            created = int(record["created_utc"])
        except (TypeError, ValueError):
            rejects.add(line_no, "created_utc is not an integer")
            continue
        post_id = str(record["id"])
        if not post_id:
            rejects.add(line_no, "empty post id")
            continue
        if post_id in seen_ids:
            rejects.add(line_no, "duplicate post_id (first occurrence kept)")
            log.debug("duplicate post_id %s at line %d", post_id, line_no)
            continue
        seen_ids.add(post_id)
        yield Post(
            post_id=post_id,
            author=str(record["author"]),
            created_at=created,
            subreddit=str(record["subreddit"]),
            text=join_title_body(str(record["title"] or ""), str(record["selftext"] or "")),
        )


def serialize_post(post: Post) -> dict:
    """Encode a post in the dump schema so parse_dump round-trips it."""
    return {
        "id": post.post_id,
        "author": post.author,
        "created_utc": post.created_at,
        "subreddit": post.subreddit,
        "title": post.text,
        "selftext": "",
    }


def word_count(text: str) -> int:
    """Number of maximal whitespace-separated tokens."""
    return len(text.split())


def filter_corpus(
    posts: Iterable[Post],
    age_income_flags: Mapping[str, bool],
    min_posts: int = 15,
    min_words: int = 20,
    user_post_counts: Mapping[str, int] | None = None,
) -> tuple[list[Post], CorpusStats]:
    """Apply the user/post eligibility filters.

    A post is retained when its author has at least ``min_posts`` posts,
    the author's age/income flag is true, and the post itself has at least
    ``min_words`` whitespace tokens. The author post count is taken over
    the input sequence before any word filtering; pass ``user_post_counts``
    (e.g. counts from the raw dump) to re-filter an intermediate corpus
    under the original counting basis. Authors missing from
    ``age_income_flags`` are treated as not flagged.
    """
    if min_posts < 0 or min_words < 0:
        raise ConfigError(f"thresholds must be non-negative (min_posts={min_posts}, min_words={min_words})")

    posts = list(posts)
    if user_post_counts is None:
        counts: dict[str, int] = {}
        for post in posts:
            counts[post.author] = counts.get(post.author, 0) + 1
    else:
        counts = dict(user_post_counts)

    eligible: list[Post] = []
    eligible_users: set[str] = set()
    for post in posts:
        if counts.get(post.author, 0) < min_posts:
            continue
        if not age_income_flags.get(post.author, False):
            continue
        if word_count(post.text) < min_words:
            continue
        eligible.append(post)
        eligible_users.add(post.author)

    total_users = len({p.author for p in posts})
    stats = CorpusStats(
        total_posts=len(posts),
        eligible_posts=len(eligible),
        total_users=total_users,
        eligible_users=len(eligible_users),
        posts_per_user_mean=(len(eligible) / len(eligible_users)) if eligible_users else 0.0,
    )
    return eligible, stats
