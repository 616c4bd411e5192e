"""Aggregate need records, profiles and topic assignments into report tables.

Everything here is a pure fold over immutable record sets: permuting the
input order changes no output, and every table's grand total reconciles with
the number of input records (residuals such as unmodeled needs or unassigned
risk get their own labeled columns rather than disappearing).
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .attribution import UserProfile
from .corpus import Post
from .errors import AnalyticsError
from .extraction.types import NeedRecord, NhfLevel5, NpfLevel, RiskLevel, StressLevel

log = logging.getLogger(__name__)

UNMODELED = "unmodeled"

INCOME_BINS: tuple[tuple[str, float, float], ...] = (
    ("0-4000", 0.0, 4000.0),
    ("4001-8000", 4000.0, 8000.0),
    ("8001-12000", 8000.0, 12000.0),
    ("12001-16000", 12000.0, 16000.0),
    ("16001-20000", 16000.0, 20000.0),
    (">20000", 20000.0, math.inf),
)

ASSIGNED_RISKS = (RiskLevel.CAUTIOUS, RiskLevel.CALCULATIVE, RiskLevel.CHANCE_TAKING)


def income_bin(monthly: float) -> str:
    """Right-closed bins: a boundary value lands in exactly one bin."""
    if monthly < 0:
        raise AnalyticsError(f"negative income {monthly}")
    for label, lo, hi in INCOME_BINS:
        if lo < monthly <= hi or (lo == 0.0 and monthly == 0.0):
            return label
    raise AnalyticsError(f"income {monthly} not binnable")  # pragma: no cover


@dataclass(frozen=True, slots=True)
class AgeGroupRow:
    n_users: int
    avg_monthly_income: float | None
    n_posts: int
    n_needs: int


@dataclass(slots=True)
class AgeGroupTable:
    rows: dict[str, AgeGroupRow]

    def total_needs(self) -> int:
        return sum(r.n_needs for r in self.rows.values())

    def total_users(self) -> int:
        return sum(r.n_users for r in self.rows.values())

    def total_posts(self) -> int:
        return sum(r.n_posts for r in self.rows.values())


@dataclass(frozen=True, slots=True)
class LevelIncomeRow:
    mean_income: float | None  # absent (None) for empty levels, never 0
    n_needs: int


@dataclass(slots=True)
class LevelIncomeTable:
    nhf5: dict[NhfLevel5, LevelIncomeRow]
    npf: dict[NpfLevel, LevelIncomeRow]

    def total_needs_nhf(self) -> int:
        return sum(r.n_needs for r in self.nhf5.values())

    def total_needs_npf(self) -> int:
        return sum(r.n_needs for r in self.npf.values())


@dataclass(slots=True)
class CooccurrenceMatrix:
    """Square symmetric pair counts; the unit is an unordered pair of
    distinct needs extracted from the same post."""

    labels: list[str]
    counts: list[list[int]]
    unit: str = "unordered pair of distinct needs within one post"

    def value(self, a: str, b: str) -> int:
        return self.counts[self.labels.index(a)][self.labels.index(b)]

    def edge_list(self) -> list[dict]:
        edges = []
        for i, src in enumerate(self.labels):
            for j in range(i, len(self.labels)):
                weight = self.counts[i][j]
                if weight:
                    edges.append({"source": src, "target": self.labels[j], "weight": weight})
        return edges


@dataclass(slots=True)
class CrossFrameworkMatrix:
    """Rectangular NHF-5 x NPF pair counts over within-post need pairs."""

    nhf_labels: list[str]
    npf_labels: list[str]
    counts: list[list[int]]

    def value(self, nhf: str, npf: str) -> int:
        return self.counts[self.nhf_labels.index(nhf)][self.npf_labels.index(npf)]

    def row_sums(self) -> dict[str, int]:
        return {label: sum(row) for label, row in zip(self.nhf_labels, self.counts)}


@dataclass(slots=True)
class CorrelationTable:
    """Phi coefficients between need-level and attribute-level indicators.

    Values are None when one indicator is constant (level absent or
    universal) rather than NaN.
    """

    stress_columns: list[str]
    risk_columns: list[str]
    rows: dict[str, dict[str, float | None]]


@dataclass(frozen=True, slots=True)
class IncomeBinRow:
    stress: dict[str, int]
    risk: dict[str, int]
    n_unassigned_risk: int
    n_needs: int


@dataclass(slots=True)
class IncomeBinTable:
    rows: dict[str, IncomeBinRow]
    nhf_rows: dict[str, IncomeBinRow] = field(default_factory=dict)
    npf_rows: dict[str, IncomeBinRow] = field(default_factory=dict)


def _income_for_need(need: NeedRecord, profiles: Mapping[str, UserProfile]) -> float:
    profile = profiles.get(need.user)
    if profile is None or not profile.income_by_year:
        raise AnalyticsError(f"need {need.need_id} references user {need.user!r} without resolved income")
    income = profile.income_by_year.get(need.year)
    if income is None:
        raise AnalyticsError(
            f"need {need.need_id}: no income resolved for {need.user!r} in year {need.year}"
        )
    return income


def build_age_table(
    profiles: Mapping[str, UserProfile],
    posts: Sequence[Post],
    needs: Sequence[NeedRecord],
) -> AgeGroupTable:
    """Users, mean monthly income, posts and needs per age category.

    Each user contributes one income value (the mean across their resolved
    years); category income is the mean over its users.
    """
    users_by_cat: dict[str, list[str]] = defaultdict(list)
    for user, profile in profiles.items():
        if profile.age_category is None or not profile.income_by_year:
            raise AnalyticsError(f"profile for {user!r} lacks age or income")
        users_by_cat[profile.age_category].append(user)

    posts_by_cat: Counter[str] = Counter()
    for post in posts:
        profile = profiles.get(post.author)
        if profile is not None and profile.age_category is not None:
            posts_by_cat[profile.age_category] += 1

    needs_by_cat: Counter[str] = Counter()
    for need in needs:
        _income_for_need(need, profiles)  # raises on contract violation
        category = profiles[need.user].age_category
        needs_by_cat[category] += 1

    rows: dict[str, AgeGroupRow] = {}
    for category in sorted(set(users_by_cat) | set(posts_by_cat) | set(needs_by_cat)):
        members = users_by_cat.get(category, [])
        mean_income = (
            sum(profiles[u].mean_monthly_income for u in members) / len(members) if members else None
        )
        rows[category] = AgeGroupRow(
            n_users=len(members),
            avg_monthly_income=mean_income,
            n_posts=posts_by_cat.get(category, 0),
            n_needs=needs_by_cat.get(category, 0),
        )
    return AgeGroupTable(rows=rows)


def build_level_income_table(
    needs: Sequence[NeedRecord],
    profiles: Mapping[str, UserProfile],
) -> LevelIncomeTable:
    """Mean monthly income and need count per NHF-5 level and per NPF level.

    Each need contributes its posting user's resolved income for the post's
    year; the mean is over needs.
    """
    nhf_sum: dict[NhfLevel5, float] = defaultdict(float)
    nhf_n: Counter[NhfLevel5] = Counter()
    npf_sum: dict[NpfLevel, float] = defaultdict(float)
    npf_n: Counter[NpfLevel] = Counter()
    for need in needs:
        income = _income_for_need(need, profiles)
        nhf_sum[need.nhf5] += income
        nhf_n[need.nhf5] += 1
        npf_sum[need.npf] += income
        npf_n[need.npf] += 1

    nhf_rows = {
        level: LevelIncomeRow(
            mean_income=(nhf_sum[level] / nhf_n[level]) if nhf_n[level] else None,
            n_needs=nhf_n[level],
        )
        for level in NhfLevel5
    }
    npf_rows = {
        level: LevelIncomeRow(
            mean_income=(npf_sum[level] / npf_n[level]) if npf_n[level] else None,
            n_needs=npf_n[level],
        )
        for level in NpfLevel
    }
    return LevelIncomeTable(nhf5=nhf_rows, npf=npf_rows)


def hypothesis_checks(level_income: LevelIncomeTable) -> dict:
    """Pairwise income ordering along each framework's rank order.

    Reports, per adjacent pair, whether the mean income strictly increased;
    a "dip" is a level whose mean is below its predecessor's. No statistical
    significance is claimed.
    """

    def pairs_for(rows: dict, order: list) -> tuple[list[dict], list[str]]:
        pairs = []
        dips = []
        for lower, upper in zip(order, order[1:]):
            a, b = rows[lower].mean_income, rows[upper].mean_income
            if a is None or b is None:
                relation = None
            elif b > a:
                relation = "increase"
            elif b < a:
                relation = "decrease"
            else:
                relation = "equal"
            if relation == "decrease":
                dips.append(upper.value)
            pairs.append(
                {
                    "from": lower.value,
                    "to": upper.value,
                    "from_mean": a,
                    "to_mean": b,
                    "relation": relation,
                    "increased": relation == "increase",
                }
            )
        return pairs, dips

    h1_pairs, h1_dips = pairs_for(level_income.nhf5, list(NhfLevel5))
    h2_pairs, h2_dips = pairs_for(level_income.npf, list(NpfLevel))
    return {
        "h1": {"pairs": h1_pairs, "dips": h1_dips, "monotone": not h1_dips and all(p["increased"] for p in h1_pairs)},
        "h2": {"pairs": h2_pairs, "dips": h2_dips, "monotone": not h2_dips and all(p["increased"] for p in h2_pairs)},
    }


def map_topics_to_levels(
    needs: Sequence[NeedRecord],
    topic_assignment: Mapping[str, int],
    n_topics: int,
    topic_labels: Mapping[int, str] | None = None,
) -> dict[str, dict[str, dict[str, int]]]:
    """Count needs at (hierarchy level, dominant topic), per framework.

    Needs excluded from modeling land in an explicit "unmodeled" column so
    the grand total still equals the number of input needs.
    """

    def topic_name(index: int) -> str:
        if topic_labels and index in topic_labels:
            return topic_labels[index]
        return f"topic_{index}"

    columns = [topic_name(i) for i in range(n_topics)] + [UNMODELED]
    nhf: dict[str, dict[str, int]] = {level.value: {c: 0 for c in columns} for level in NhfLevel5}
    npf: dict[str, dict[str, int]] = {level.value: {c: 0 for c in columns} for level in NpfLevel}
    for need in needs:
        topic = topic_assignment.get(need.need_id)
        column = topic_name(topic) if topic is not None else UNMODELED
        nhf[need.nhf5.value][column] += 1
        npf[need.npf.value][column] += 1
    return {"nhf5": nhf, "npf": npf}


def _need_key(need: NeedRecord, key: str, topic_assignment: Mapping[str, int] | None) -> str:
    if key == "topic":
        if topic_assignment is None:
            raise AnalyticsError("topic co-occurrence requires a topic assignment")
        topic = topic_assignment.get(need.need_id)
        return f"topic_{topic}" if topic is not None else UNMODELED
    if key == "nhf5":
        return need.nhf5.value
    if key == "npf":
        return need.npf.value
    raise AnalyticsError(f"unknown co-occurrence key {key!r}")


def cooccurrence(
    needs: Sequence[NeedRecord],
    key: str,
    topic_assignment: Mapping[str, int] | None = None,
) -> CooccurrenceMatrix | CrossFrameworkMatrix:
    """Within-post pair counts keyed by topic, nhf5, npf or cross_framework."""
    by_post: dict[str, list[NeedRecord]] = defaultdict(list)
    for need in needs:
        by_post[need.post_id].append(need)

    if key == "cross_framework":
        nhf_labels = [level.value for level in NhfLevel5]
        npf_labels = [level.value for level in NpfLevel]
        counts = [[0] * len(npf_labels) for _ in nhf_labels]
        for group in by_post.values():
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    a, b = group[i], group[j]
                    counts[nhf_labels.index(a.nhf5.value)][npf_labels.index(b.npf.value)] += 1
                    counts[nhf_labels.index(b.nhf5.value)][npf_labels.index(a.npf.value)] += 1
        return CrossFrameworkMatrix(nhf_labels=nhf_labels, npf_labels=npf_labels, counts=counts)

    if key == "topic":
        if topic_assignment is None:
            raise AnalyticsError("topic co-occurrence requires a topic assignment")
        n_topics = (max(topic_assignment.values()) + 1) if topic_assignment else 0
        labels = [f"topic_{i}" for i in range(n_topics)]
        if any(topic_assignment.get(n.need_id) is None for n in needs):
            labels.append(UNMODELED)
    elif key == "nhf5":
        labels = [level.value for level in NhfLevel5]
    elif key == "npf":
        labels = [level.value for level in NpfLevel]
    else:
        raise AnalyticsError(f"unknown co-occurrence key {key!r}")

    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for group in by_post.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                a = index[_need_key(group[i], key, topic_assignment)]
                b = index[_need_key(group[j], key, topic_assignment)]
                if a == b:
                    counts[a][a] += 1
                else:
                    counts[a][b] += 1
                    counts[b][a] += 1
    return CooccurrenceMatrix(labels=labels, counts=counts)


def phi_from_contingency(a: int, b: int, c: int, d: int) -> float | None:
    """Phi coefficient of a 2x2 contingency table (None when undefined)."""
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    if denom == 0:
        return None
    return (a * d - b * c) / math.sqrt(denom)


def behavior_correlations(needs: Sequence[NeedRecord]) -> CorrelationTable:
    """Phi between 1[need at level] and 1[need has attribute], per pair.

    Risk columns are computed over the needs with an assigned risk only;
    stress columns use all needs.
    """
    stress_cols = [level.value for level in StressLevel]
    risk_cols = [level.value for level in ASSIGNED_RISKS]
    level_rows: list[tuple[str, str]] = [("nhf5", level.value) for level in NhfLevel5]
    level_rows += [("npf", level.value) for level in NpfLevel]

    assigned = [n for n in needs if n.risk is not RiskLevel.UNASSIGNED]

    rows: dict[str, dict[str, float | None]] = {}
    for framework, level in level_rows:
        row: dict[str, float | None] = {}
        for stress in StressLevel:
            row[stress.value] = _phi_for(needs, framework, level, "stress", stress.value)
        for risk in ASSIGNED_RISKS:
            row[risk.value] = _phi_for(assigned, framework, level, "risk", risk.value)
        rows[level] = row
    return CorrelationTable(stress_columns=stress_cols, risk_columns=risk_cols, rows=rows)


def _phi_for(
    universe: Sequence[NeedRecord],
    framework: str,
    level: str,
    attribute: str,
    attr_level: str,
) -> float | None:
    a = b = c = d = 0
    for need in universe:
        has_level = (need.nhf5.value if framework == "nhf5" else need.npf.value) == level
        has_attr = (need.stress.value if attribute == "stress" else need.risk.value) == attr_level
        if has_level and has_attr:
            a += 1
        elif has_level:
            b += 1
        elif has_attr:
            c += 1
        else:
            d += 1
    return phi_from_contingency(a, b, c, d)


def build_income_bin_table(
    needs: Sequence[NeedRecord],
    profiles: Mapping[str, UserProfile],
) -> IncomeBinTable:
    """Stress/risk counts per monthly-income bin, plus per NHF-5/NPF level."""

    def new_acc() -> dict:
        return {
            "stress": Counter(),
            "risk": Counter(),
            "unassigned": 0,
            "n": 0,
        }

    bins: dict[str, dict] = defaultdict(new_acc)
    nhf_acc: dict[str, dict] = defaultdict(new_acc)
    npf_acc: dict[str, dict] = defaultdict(new_acc)

    for need in needs:
        income = _income_for_need(need, profiles)
        for acc in (bins[income_bin(income)], nhf_acc[need.nhf5.value], npf_acc[need.npf.value]):
            acc["n"] += 1
            acc["stress"][need.stress.value] += 1
            if need.risk is RiskLevel.UNASSIGNED:
                acc["unassigned"] += 1
            else:
                acc["risk"][need.risk.value] += 1

    def to_rows(acc_map: dict[str, dict], order: Iterable[str]) -> dict[str, IncomeBinRow]:
        rows = {}
        for label in order:
            acc = acc_map.get(label)
            if acc is None:
                continue
            rows[label] = IncomeBinRow(
                stress={s.value: acc["stress"].get(s.value, 0) for s in StressLevel},
                risk={r.value: acc["risk"].get(r.value, 0) for r in ASSIGNED_RISKS},
                n_unassigned_risk=acc["unassigned"],
                n_needs=acc["n"],
            )
        return rows

    return IncomeBinTable(
        rows=to_rows(bins, [label for label, _, _ in INCOME_BINS]),
        nhf_rows=to_rows(nhf_acc, [level.value for level in NhfLevel5]),
        npf_rows=to_rows(npf_acc, [level.value for level in NpfLevel]),
    )
