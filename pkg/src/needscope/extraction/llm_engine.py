"""LLM-backed extraction engine sharing the rule engine's contract."""

from __future__ import annotations

import logging

from ..attribution import AgeMention, IncomeMention
from ..corpus import Post
from .client import LlmClient
from .prompts import render
from .types import (
    EmotionProfile,
    NeedLabel,
    NhfLevel7,
    NpfLevel,
    QuerySummary,
    RiskLevel,
    StressLevel,
)

log = logging.getLogger(__name__)


class LlmEngine:
    """Implements each capability as one schema-validated prompt."""

    name = "llm"

    def __init__(self, client: LlmClient):
        self.client = client
        self.version = client.prompt_version

    def summarize(self, post: Post) -> QuerySummary:
        payload = self.client.llm_call(render("summary_v1", post.text), "summary_v1", post.post_id)
        return QuerySummary(
            post_id=post.post_id,
            core_query=payload["core_query"].strip().lower(),
            additional_queries=tuple(q.strip().lower() for q in payload["additional_queries"]),
        )

    def extract_needs(self, summary: QuerySummary) -> list[NeedLabel]:
        listing = "\n".join(f"{i + 1}. {q}" for i, q in enumerate(summary.queries))
        payload = self.client.llm_call(render("needs_v1", listing), "needs_v1", summary.post_id)
        labels = [NeedLabel(item["purpose"], item["process"]) for item in payload["needs"]]
        # one label per query; pad with the last label if the model returned fewer
        want = len(summary.queries)
        if len(labels) > want:
            labels = labels[:want]
        while len(labels) < want:
            labels.append(labels[-1])
        return labels

    def map_hierarchy(self, label: NeedLabel, context: QuerySummary) -> tuple[NhfLevel7, NpfLevel]:
        text = f"purpose: {label.purpose}; process: {label.process}; context: {context.core_query}"
        payload = self.client.llm_call(render("hierarchy_v1", text), "hierarchy_v1", context.post_id)
        return NhfLevel7(payload["nhf7"]), NpfLevel(payload["npf"])

    def assess_behavior(self, label: NeedLabel, context: QuerySummary) -> tuple[StressLevel, RiskLevel]:
        text = f"purpose: {label.purpose}; process: {label.process}; context: {' | '.join(context.queries)}"
        payload = self.client.llm_call(render("behavior_v1", text), "behavior_v1", context.post_id)
        return StressLevel(payload["stress"]), RiskLevel(payload["risk"])

    def score_emotion(self, post: Post) -> EmotionProfile:
        if not post.text.strip():
            return EmotionProfile.from_counts({})
        payload = self.client.llm_call(render("emotion_v1", post.text), "emotion_v1", post.post_id)
        return EmotionProfile.from_counts(payload)

    def detect_age_income(self, post: Post) -> tuple[list[AgeMention], list[IncomeMention]]:
        payload = self.client.llm_call(render("age_income_v1", post.text), "age_income_v1", post.post_id)
        ages = [AgeMention(post_id=post.post_id, year=post.year, age_years=a) for a in payload["ages"]]
        incomes = [
            IncomeMention(post_id=post.post_id, year=post.year, amount=float(i["amount"]), period=i["period"])
            for i in payload["incomes"]
        ]
        return ages, incomes
