"""The contract every extraction engine implements.

Engines are exchangeable: downstream modules only see the domain types
returned here, and every output must use the closed enumerations from
:mod:`needscope.extraction.types` (out-of-vocabulary values fail, they are
never coerced).
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

from .types import EmotionProfile, NeedLabel, NhfLevel7, NpfLevel, QuerySummary, RiskLevel, StressLevel

if TYPE_CHECKING:  # pragma: no cover
    from ..attribution import AgeMention, IncomeMention
    from ..corpus import Post

CAPABILITIES = frozenset({"summarize", "needs", "hierarchy", "stress_risk", "emotion", "age_income"})


@runtime_checkable
class ExtractionEngine(Protocol):
    """Protocol shared by the rule-based and LLM-backed engines."""

    name: str
    version: str

    def summarize(self, post: "Post") -> QuerySummary: ...

    def extract_needs(self, summary: QuerySummary) -> list[NeedLabel]: ...

    def map_hierarchy(self, label: NeedLabel, context: QuerySummary) -> tuple[NhfLevel7, NpfLevel]: ...

    def assess_behavior(self, label: NeedLabel, context: QuerySummary) -> tuple[StressLevel, RiskLevel]: ...

    def score_emotion(self, post: "Post") -> EmotionProfile: ...

    def detect_age_income(self, post: "Post") -> tuple[list["AgeMention"], list["IncomeMention"]]: ...
