"""Resolve a single age and monthly income per user from per-post mentions.

Resolution rules:

* Age: take the most recent year with any mention; within that year take the
  lowest age (avoids overestimating a user's financial stage).
* Income: per year take the lowest monthly-normalized mention. Post years
  before the earliest mention are back-filled from it; gap years between two
  mentions take the nearest later mention's value; years after the last
  mention carry it forward. Users with no income mention resolve to an empty
  map and are excluded downstream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import AttributionError

if TYPE_CHECKING:  # pragma: no cover
    from .corpus import Post
    from .extraction.engine import ExtractionEngine

log = logging.getLogger(__name__)

# Hourly/weekly conversion constants: 40 h/week,
# 52 weeks/year, 26 biweekly periods/year.
HOURS_PER_WEEK = 40
WEEKS_PER_YEAR = 52
BIWEEKS_PER_YEAR = 26

PERIODS = ("monthly", "annual", "hourly", "weekly", "biweekly")

AGE_CATEGORIES: tuple[tuple[str, int, int], ...] = (
    ("<21", 1, 20),
    ("21-30", 21, 30),
    ("31-40", 31, 40),
    ("41-50", 41, 50),
    ("51-60", 51, 60),
    (">60", 61, 119),
)


@dataclass(frozen=True, slots=True)
class AgeMention:
    post_id: str
    year: int
    age_years: int


@dataclass(frozen=True, slots=True)
class IncomeMention:
    post_id: str
    year: int
    amount: float  # USD, in the stated period
    period: str


@dataclass(slots=True)
class UserProfile:
    user: str
    resolved_age: int | None = None
    age_category: str | None = None
    income_by_year: dict[int, float] = field(default_factory=dict)

    @property
    def has_age_and_income(self) -> bool:
        return self.resolved_age is not None and bool(self.income_by_year)

    @property
    def mean_monthly_income(self) -> float:
        if not self.income_by_year:
            raise AttributionError(f"user {self.user!r} has no resolved income")
        return sum(self.income_by_year.values()) / len(self.income_by_year)

    def as_dict(self) -> dict:
        return {
            "user": self.user,
            "resolved_age": self.resolved_age,
            "age_category": self.age_category,
            "income_by_year": {str(y): v for y, v in sorted(self.income_by_year.items())},
        }

    @classmethod
    def from_dict(cls, record: dict) -> "UserProfile":
        return cls(
            user=record["user"],
            resolved_age=record.get("resolved_age"),
            age_category=record.get("age_category"),
            income_by_year={int(y): float(v) for y, v in record.get("income_by_year", {}).items()},
        )


def normalize_income(amount: float, period: str) -> float:
    """Convert an income mention to monthly USD."""
    if amount <= 0:
        raise AttributionError(f"income amount must be positive, got {amount}")
    if period == "monthly":
        return float(amount)
    if period == "annual":
        return amount / 12.0
    if period == "hourly":
        return amount * HOURS_PER_WEEK * WEEKS_PER_YEAR / 12.0
    if period == "weekly":
        return amount * WEEKS_PER_YEAR / 12.0
    if period == "biweekly":
        return amount * BIWEEKS_PER_YEAR / 12.0
    raise AttributionError(f"unknown income period {period!r}")


def age_category(age: int) -> str:
    for label, lo, hi in AGE_CATEGORIES:
        if lo <= age <= hi:
            return label
    raise AttributionError(f"age {age} outside (0, 120)")


def resolve_age(mentions: Sequence[AgeMention]) -> tuple[int, str] | None:
    """Resolve one age from a user's mentions, or None when there are none.

    Uses the most recent year that has mentions, and the minimum age within
    that year.
    """
    if not mentions:
        return None
    latest = max(m.year for m in mentions)
    age = min(m.age_years for m in mentions if m.year == latest)
    return age, age_category(age)


def resolve_income(
    mentions: Sequence[IncomeMention],
    post_years: Iterable[int],
) -> dict[int, float]:
    """Map every post year to a monthly income, or {} with no mentions.

    Mentions are normalized to monthly first. Within a mentioned year the
    minimum wins; unmentioned years take the nearest later mentioned year's
    value, falling back to the most recent earlier one past the last mention.
    """
    if not mentions:
        return {}
    per_year: dict[int, float] = {}
    for m in mentions:
        monthly = normalize_income(m.amount, m.period)
        if m.year not in per_year or monthly < per_year[m.year]:
            per_year[m.year] = monthly

    mentioned = sorted(per_year)
    resolved: dict[int, float] = {}
    for year in sorted(set(post_years) | set(mentioned)):
        if year in per_year:
            resolved[year] = per_year[year]
            continue
        later = [y for y in mentioned if y > year]
        if later:
            resolved[year] = per_year[later[0]]
        else:
            earlier = [y for y in mentioned if y < year]
            resolved[year] = per_year[earlier[-1]]
    return resolved


def detect_mentions(post: "Post", extractor: "ExtractionEngine") -> tuple[list[AgeMention], list[IncomeMention]]:
    """Run the engine's age/income detector on one post.

    Engine failures are re-raised with the post id attached so batch runs can
    point at the offending record.
    """
    try:
        return extractor.detect_age_income(post)
    except AttributionError:
        raise
    except Exception as exc:
        raise AttributionError(f"age/income detection failed for post {post.post_id!r}: {exc}") from exc


def build_profile(
    user: str,
    age_mentions: Sequence[AgeMention],
    income_mentions: Sequence[IncomeMention],
    post_years: Iterable[int],
) -> UserProfile:
    """Fold one user's mentions into a profile."""
    profile = UserProfile(user=user)
    resolved = resolve_age(age_mentions)
    if resolved is not None:
        profile.resolved_age, profile.age_category = resolved
    profile.income_by_year = resolve_income(income_mentions, post_years)
    return profile
