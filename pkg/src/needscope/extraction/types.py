"""Domain types produced by extraction engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class NhfLevel7(str, Enum):
    """Seven-level needs-hierarchy labels assigned by the engines."""

    BASIC = "basic"
    SAFETY_L1 = "safety_l1"
    SAFETY_L2 = "safety_l2"
    LOVE_BELONGINGNESS = "love_belongingness"
    ESTEEM = "esteem"
    SELF_TRANSCENDENCE = "self_transcendence"
    SELF_ACTUALIZATION = "self_actualization"


class NhfLevel5(str, Enum):
    """Collapsed five-level hierarchy; declaration order is the rank order."""

    BASIC = "basic"
    SAFETY = "safety"
    LOVE_BELONGINGNESS = "love_belongingness"
    ESTEEM = "esteem"
    SELF_ACTUALIZATION = "self_actualization"

    @property
    def rank(self) -> int:
        return list(NhfLevel5).index(self) + 1


class NpfLevel(str, Enum):
    """Three-level prioritization framework; declaration order is the rank."""

    CONSUMPTION_IMMEDIATE = "consumption_immediate"
    SAVINGS_EMERGENCIES = "savings_emergencies"
    RETIREMENT_WEALTH_LIFESTYLE = "retirement_wealth_lifestyle"

    @property
    def rank(self) -> int:
        return list(NpfLevel).index(self) + 1


class StressLevel(str, Enum):
    LOW = "low"
    SLIGHT = "slight"
    MODERATE = "moderate"
    HIGH = "high"

    @property
    def rank(self) -> int:
        return list(StressLevel).index(self) + 1


class RiskLevel(str, Enum):
    CAUTIOUS = "cautious"
    CALCULATIVE = "calculative"
    CHANCE_TAKING = "chance_taking"
    UNASSIGNED = "unassigned"

    @property
    def rank(self) -> int | None:
        if self is RiskLevel.UNASSIGNED:
            return None
        return list(RiskLevel).index(self) + 1


# safety levels merge into one; transcendence merges into self-actualization
NHF7_TO_NHF5: dict[NhfLevel7, NhfLevel5] = {
    NhfLevel7.BASIC: NhfLevel5.BASIC,
    NhfLevel7.SAFETY_L1: NhfLevel5.SAFETY,
    NhfLevel7.SAFETY_L2: NhfLevel5.SAFETY,
    NhfLevel7.LOVE_BELONGINGNESS: NhfLevel5.LOVE_BELONGINGNESS,
    NhfLevel7.ESTEEM: NhfLevel5.ESTEEM,
    NhfLevel7.SELF_TRANSCENDENCE: NhfLevel5.SELF_ACTUALIZATION,
    NhfLevel7.SELF_ACTUALIZATION: NhfLevel5.SELF_ACTUALIZATION,
}


def collapse_nhf7(level: NhfLevel7) -> NhfLevel5:
    return NHF7_TO_NHF5[level]


EMOTIONS = ("fear", "sadness", "surprise", "happiness", "anger")


@dataclass(frozen=True, slots=True)
class QuerySummary:
    """One core query plus at most two additional queries for a post."""

    post_id: str
    core_query: str
    additional_queries: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.core_query:
            raise ValueError("core_query must be non-empty")
        if len(self.additional_queries) > 2:
            raise ValueError("at most 2 additional queries")

    @property
    def queries(self) -> tuple[str, ...]:
        return (self.core_query, *self.additional_queries)


@dataclass(frozen=True, slots=True)
class NeedLabel:
    """A (purpose, financial process) pair, lowercase-normalized."""

    purpose: str
    process: str

    def __post_init__(self) -> None:
        if not self.purpose or not self.process:
            raise ValueError("purpose and process must be non-empty")
        object.__setattr__(self, "purpose", self.purpose.strip().lower())
        object.__setattr__(self, "process", self.process.strip().lower())


@dataclass(frozen=True, slots=True)
class EmotionProfile:
    """Post-level distribution over the five tracked emotions.

    Scores sum to 1 when any emotion was detected, otherwise all are zero and
    there is no dominant emotion. Dominant ties break by the fixed key order
    fear < sadness < surprise < happiness < anger.
    """

    scores: dict[str, float]
    dominant: str | None

    @classmethod
    def from_counts(cls, counts: dict[str, float]) -> "EmotionProfile":
        total = sum(max(0.0, counts.get(e, 0.0)) for e in EMOTIONS)
        if total <= 0:
            return cls(scores={e: 0.0 for e in EMOTIONS}, dominant=None)
        scores = {e: max(0.0, counts.get(e, 0.0)) / total for e in EMOTIONS}
        best = max(EMOTIONS, key=lambda e: scores[e])  # max() keeps the first on ties
        return cls(scores=scores, dominant=best)


@dataclass(frozen=True, slots=True)
class NeedRecord:
    """One extracted financial need with its hierarchy and behavior labels."""

    need_id: str
    post_id: str
    user: str
    year: int
    label: NeedLabel
    nhf7: NhfLevel7
    nhf5: NhfLevel5
    npf: NpfLevel
    stress: StressLevel
    risk: RiskLevel
    query: str
    prompt_version: str

    def __post_init__(self) -> None:
        if self.nhf5 is not collapse_nhf7(self.nhf7):
            raise ValueError(f"nhf5 {self.nhf5} is not the collapse of nhf7 {self.nhf7}")

    def as_dict(self) -> dict:
        return {
            "need_id": self.need_id,
            "post_id": self.post_id,
            "user": self.user,
            "year": self.year,
            "purpose": self.label.purpose,
            "process": self.label.process,
            "nhf7": self.nhf7.value,
            "nhf5": self.nhf5.value,
            "npf": self.npf.value,
            "stress": self.stress.value,
            "risk": self.risk.value,
            "query": self.query,
            "prompt_version": self.prompt_version,
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "NeedRecord":
        return cls(
            need_id=rec["need_id"],
            post_id=rec["post_id"],
            user=rec["user"],
            year=int(rec["year"]),
            label=NeedLabel(rec["purpose"], rec["process"]),
            nhf7=NhfLevel7(rec["nhf7"]),
            nhf5=NhfLevel5(rec["nhf5"]),
            npf=NpfLevel(rec["npf"]),
            stress=StressLevel(rec["stress"]),
            risk=RiskLevel(rec["risk"]),
            query=rec.get("query", ""),
            prompt_version=rec.get("prompt_version", ""),
        )


@dataclass(frozen=True, slots=True)
class EngineConfig:
    """Connection and retry settings for the LLM-backed engine."""

    base_url: str = ""
    model: str = "llama3-70b"
    api_key_env: str = "NEEDSCOPE_API_KEY"
    timeout: float = 30.0
    max_attempts: int = 4
    backoff_base: float = 0.5
    backoff_cap: float = 8.0
    max_concurrency: int = 4
    requests_per_second: float = 4.0
