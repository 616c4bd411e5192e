"""Versioned prompt assets for the LLM-backed engine.

PROMPT_VERSION is stamped into every cached payload and every need record so
corpora extracted under different prompts are never silently mixed. Bump it
whenever any template changes.
"""

from __future__ import annotations

import json

from .schemas import SCHEMAS

PROMPT_VERSION = "p1"

_TEMPLATES: dict[str, str] = {
    "summary_v1": (
        "You summarize a personal-finance post into the questions it asks.\n"
        "Return JSON with one core query (the dominant ask, one sentence,\n"
        "lowercase) and up to two additional queries.\n"
        "JSON schema:\n{schema}\n\nPost:\n{text}\n"
    ),
    "needs_v1": (
        "Extract one financial need per query below. A need is a purpose\n"
        "(e.g. medical expenses, education, buying house) combined with a\n"
        "financial process (e.g. saving, investing, budgeting, insurance).\n"
        "Return lowercase JSON matching this schema, one need per query,\n"
        "in query order:\n{schema}\n\nQueries:\n{text}\n"
    ),
    "hierarchy_v1": (
        "Map the financial need below onto two frameworks.\n"
        "nhf7 levels: basic (rent and utilities, debt management),\n"
        "safety_l1 (emergency savings, basic insurance), safety_l2 (buying a\n"
        "home, long-term retirement savings), love_belongingness (family,\n"
        "support for aging parents), esteem (real-estate investing,\n"
        "independence through self-employment), self_transcendence (freedom\n"
        "of choices, passions), self_actualization (philanthropy, legacy\n"
        "planning).\n"
        "npf levels: consumption_immediate, savings_emergencies,\n"
        "retirement_wealth_lifestyle.\n"
        "Return JSON matching this schema exactly:\n{schema}\n\nNeed:\n{text}\n"
    ),
    "behavior_v1": (
        "Assess the financial stress level (low, slight, moderate, high) and\n"
        "risk propensity (cautious, calculative, chance_taking, or unassigned\n"
        "when no risk cue is present) expressed by the need below.\n"
        "Return JSON matching this schema exactly:\n{schema}\n\nNeed:\n{text}\n"
    ),
    "emotion_v1": (
        "Score the post below on five emotions (fear, sadness, surprise,\n"
        "happiness, anger) with non-negative numbers; use all zeros when no\n"
        "emotion is expressed. Return JSON matching this schema:\n{schema}\n\nPost:\n{text}\n"
    ),
    "age_income_v1": (
        "Report every explicit age the author states about themselves and\n"
        "every explicit income figure with its period (monthly, annual,\n"
        "hourly, weekly, biweekly). Use empty arrays when not mentioned.\n"
        "Only US-dollar incomes count. Return JSON matching this schema:\n{schema}\n\nPost:\n{text}\n"
    ),
}

CORRECTIVE_SUFFIX = (
    "\n\nYour previous reply did not validate: {error}\n"
    "Respond again with JSON that matches the schema exactly, nothing else.\n"
)


def render(schema_id: str, text: str) -> str:
    template = _TEMPLATES[schema_id]
    return template.format(schema=json.dumps(SCHEMAS[schema_id], sort_keys=True), text=text)
