"""Deterministic rule-based reference engine.

Keyword and lexicon maps stand in for the LLM so the whole pipeline and test
suite run offline. Same input always yields byte-identical output. This
engine is a test oracle and fallback, not a fidelity claim.
"""

from __future__ import annotations

import logging
import re

from ..attribution import AgeMention, IncomeMention
from ..corpus import Post
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

RULE_VERSION = "rule-1"

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+|\n+")
_INTERROGATIVE = re.compile(
    r"^(how|what|should|can|could|would|is|are|do|does|did|where|when|why|which|who|am i|any advice|anyone)\b",
    re.IGNORECASE,
)

# --- needs keyword maps (ordered: first hit wins) -------------------------

_PURPOSE_RULES: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("medical expenses", ("medical", "hospital", "surgery", "doctor", "dental", "health bill")),
    ("emergency fund", ("emergency fund", "emergency savings", "rainy day")),
    ("rent and utilities", ("rent", "utilities", "utility bill", "landlord", "lease")),
    ("debt management", ("debt", "credit card", "owe", "collections", "payday loan", "student loan")),
    ("buying house", ("buy a house", "buying a house", "down payment", "mortgage", "home purchase", "first home")),
    ("education", ("tuition", "college", "education", "school fees", "degree")),
    ("retirement", ("retirement", "retire", "401k", "401(k)", "ira", "pension")),
    ("taxes", ("tax", "taxes", "irs", "deduction")),
    ("insurance coverage", ("insurance", "coverage", "policy", "premium")),
    ("family support", ("parents", "wedding", "childcare", "kids", "family", "aging parent")),
    ("charity", ("charity", "donate", "donation", "philanthropy", "legacy", "estate plan", "will")),
    ("real estate investment", ("rental property", "real estate", "investment property")),
    ("car purchase", ("car", "vehicle", "auto loan")),
    ("lifestyle", ("vacation", "travel", "hobby", "sabbatical", "passion")),
    ("investing", ("index fund", "etf", "stock", "portfolio", "invest", "brokerage")),
    ("savings goals", ("save", "saving", "savings")),
    ("budgeting", ("budget", "spending", "paycheck", "allocate")),
)

_PROCESS_RULES: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("legacy planning", ("legacy", "estate", "inheritance", "will", "philanthropy", "charity", "donate")),
    ("insurance", ("insurance", "coverage", "policy", "premium", "insure")),
    ("debt repayment", ("pay off", "payoff", "repay", "consolidate", "debt")),
    ("tax planning", ("tax", "deduction", "irs")),
    ("investing", ("invest", "index fund", "etf", "stock", "portfolio", "brokerage", "asset")),
    ("saving", ("save", "saving", "savings", "emergency fund", "set aside")),
    ("budgeting", ("budget", "allocate", "spend", "cut back", "paycheck")),
)

# purpose -> (NHF-7, NPF); aligned with the shipped level anchor examples
_HIERARCHY_BY_PURPOSE: dict[str, tuple[NhfLevel7, NpfLevel]] = {
    "rent and utilities": (NhfLevel7.BASIC, NpfLevel.CONSUMPTION_IMMEDIATE),
    "debt management": (NhfLevel7.BASIC, NpfLevel.SAVINGS_EMERGENCIES),
    "medical expenses": (NhfLevel7.BASIC, NpfLevel.SAVINGS_EMERGENCIES),
    "car purchase": (NhfLevel7.BASIC, NpfLevel.CONSUMPTION_IMMEDIATE),
    "budgeting": (NhfLevel7.BASIC, NpfLevel.CONSUMPTION_IMMEDIATE),
    "emergency fund": (NhfLevel7.SAFETY_L1, NpfLevel.SAVINGS_EMERGENCIES),
    "insurance coverage": (NhfLevel7.SAFETY_L1, NpfLevel.SAVINGS_EMERGENCIES),
    "savings goals": (NhfLevel7.SAFETY_L1, NpfLevel.SAVINGS_EMERGENCIES),
    "buying house": (NhfLevel7.SAFETY_L2, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "retirement": (NhfLevel7.SAFETY_L2, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "education": (NhfLevel7.SAFETY_L2, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "taxes": (NhfLevel7.SAFETY_L2, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "family support": (NhfLevel7.LOVE_BELONGINGNESS, NpfLevel.CONSUMPTION_IMMEDIATE),
    "real estate investment": (NhfLevel7.ESTEEM, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "investing": (NhfLevel7.ESTEEM, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "lifestyle": (NhfLevel7.SELF_TRANSCENDENCE, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "charity": (NhfLevel7.SELF_ACTUALIZATION, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
}

_HIERARCHY_BY_PROCESS: dict[str, tuple[NhfLevel7, NpfLevel]] = {
    "legacy planning": (NhfLevel7.SELF_ACTUALIZATION, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "investing": (NhfLevel7.ESTEEM, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "saving": (NhfLevel7.SAFETY_L1, NpfLevel.SAVINGS_EMERGENCIES),
    "insurance": (NhfLevel7.SAFETY_L1, NpfLevel.SAVINGS_EMERGENCIES),
    "debt repayment": (NhfLevel7.BASIC, NpfLevel.SAVINGS_EMERGENCIES),
    "tax planning": (NhfLevel7.SAFETY_L2, NpfLevel.RETIREMENT_WEALTH_LIFESTYLE),
    "budgeting": (NhfLevel7.BASIC, NpfLevel.CONSUMPTION_IMMEDIATE),
}

_STRESS_CUES: tuple[tuple[StressLevel, tuple[str, ...]], ...] = (
    (
        StressLevel.HIGH,
        ("evict", "foreclos", "desperate", "urgent", "panic", "drowning", "can't afford",
         "cannot afford", "crisis", "terrified", "collections", "repossess", "shut off"),
    ),
    (
        StressLevel.MODERATE,
        ("worried", "struggling", "anxious", "stressed", "stress", "overwhelmed", "behind on",
         "afraid", "scared", "losing sleep"),
    ),
    (
        StressLevel.SLIGHT,
        ("concerned", "unsure", "nervous", "tight", "uneasy", "not sure", "bit worried"),
    ),
)

_RISK_CUES: tuple[tuple[RiskLevel, tuple[str, ...]], ...] = (
    (
        RiskLevel.CHANCE_TAKING,
        ("yolo", "all in", "all-in", "gamble", "moonshot", "meme stock", "lottery", "bet it",
         "penny stock", "leveraged", "options play", "crypto punt"),
    ),
    (
        RiskLevel.CALCULATIVE,
        ("vs", "versus", "compare", "comparing", "allocat", "diversif", "rebalanc", "optimi",
         "expense ratio", "weigh", "strategy", "trade-off", "tradeoff", "split between"),
    ),
    (
        RiskLevel.CAUTIOUS,
        ("safe", "low-risk", "low risk", "guaranteed", "fdic", "insured", "conservative",
         "afraid to lose", "capital preservation", "cd ladder", "no risk"),
    ),
)

_EMOTION_LEXICON: dict[str, frozenset[str]] = {
    "fear": frozenset({
        "afraid", "fear", "fears", "scared", "terrified", "worried", "worry", "worrying",
        "anxious", "anxiety", "panic", "panicking", "nervous", "dread", "frightened", "scary",
    }),
    "sadness": frozenset({
        "sad", "depressed", "depressing", "hopeless", "miserable", "grief", "crying", "cry",
        "heartbroken", "devastated", "unhappy", "despair", "down", "lost",
    }),
    "surprise": frozenset({
        "surprised", "surprise", "unexpected", "unexpectedly", "shocked", "shock", "sudden",
        "suddenly", "astonished", "stunned", "blindsided",
    }),
    "happiness": frozenset({
        "happy", "glad", "excited", "thrilled", "grateful", "relieved", "relief", "wonderful",
        "joy", "delighted", "proud", "great",
    }),
    "anger": frozenset({
        "angry", "furious", "mad", "outraged", "frustrated", "frustrating", "annoyed",
        "resentful", "hate", "livid", "unfair",
    }),
}

_WORD = re.compile(r"[a-z']+")

# --- age/income detection --------------------------------------------------

_AGE_PATTERNS = (
    re.compile(r"\b(?:i am|i'm|im)\s+(?:a\s+)?(\d{1,3})\b(?!\s*%)", re.IGNORECASE),
    re.compile(r"\b(\d{1,3})\s*(?:years?\s+old|y/?o)\b", re.IGNORECASE),
    re.compile(r"\b(?:at\s+)?age\s+(?:of\s+)?(\d{1,3})\b", re.IGNORECASE),
    re.compile(r"\b(\d{2})[mf]\b", re.IGNORECASE),
    re.compile(r"\bturn(?:ing|ed)?\s+(\d{1,3})\b", re.IGNORECASE),
)

_USD_AMOUNT = re.compile(
    r"(?:\$\s*(\d[\d,]*(?:\.\d+)?)\s*([km])?|\b(\d[\d,]*(?:\.\d+)?)\s*([km])?\s*(?:dollars|usd)\b)",
    re.IGNORECASE,
)
_NON_USD = re.compile(r"[€£¥]\s*\d")

_PERIOD_MARKERS: tuple[tuple[str, re.Pattern[str]], ...] = (
    ("biweekly", re.compile(r"\b(?:bi-?weekly|every (?:two|2) weeks|per fortnight)\b", re.IGNORECASE)),
    ("weekly", re.compile(r"(?:/\s*(?:wk|week)\b|\b(?:a|per|each)\s+week\b|\bweekly\b)", re.IGNORECASE)),
    ("hourly", re.compile(r"(?:/\s*(?:hr|hour)\b|\b(?:an|per)\s+hour\b|\bhourly\b)", re.IGNORECASE)),
    ("annual", re.compile(r"(?:/\s*(?:yr|year)\b|\b(?:a|per)\s+year\b|\b(?:annually|annual|yearly)\b)", re.IGNORECASE)),
    ("monthly", re.compile(r"(?:/\s*(?:mo|month)\b|\b(?:a|per|each)\s+month\b|\bmonthly\b)", re.IGNORECASE)),
)

# window after an amount in which a period marker counts as attached to it
_PERIOD_WINDOW = 24


def _normalize_query(sentence: str) -> str:
    text = " ".join(sentence.split())
    return text.rstrip(".!? ").lower()


class RuleEngine:
    """Offline reference implementation of the extraction contract."""

    name = "rule"
    version = RULE_VERSION

    # -- summaries ----------------------------------------------------------

    def summarize(self, post: Post) -> QuerySummary:
        sentences = [s.strip() for s in _SENTENCE_SPLIT.split(post.text) if s.strip()]
        questions = [s for s in sentences if s.endswith("?") or _INTERROGATIVE.match(s)]
        ranked = questions if questions else sentences[:1]
        if not ranked:
            ranked = [post.text.strip() or "general financial question"]
        core = _normalize_query(ranked[0])
        additional = tuple(_normalize_query(s) for s in ranked[1:3])
        return QuerySummary(post_id=post.post_id, core_query=core, additional_queries=additional)

    # -- needs ----------------------------------------------------------------

    def extract_needs(self, summary: QuerySummary) -> list[NeedLabel]:
        return [self._label_for(query) for query in summary.queries]

    def _label_for(self, query: str) -> NeedLabel:
        text = query.lower()
        purpose = next(
            (name for name, keys in _PURPOSE_RULES if any(k in text for k in keys)),
            "general finances",
        )
        process = next(
            (name for name, keys in _PROCESS_RULES if any(k in text for k in keys)),
            "budgeting",
        )
        return NeedLabel(purpose=purpose, process=process)

    # -- hierarchy -------------------------------------------------------------

    def map_hierarchy(self, label: NeedLabel, context: QuerySummary) -> tuple[NhfLevel7, NpfLevel]:
        if label.purpose in _HIERARCHY_BY_PURPOSE:
            return _HIERARCHY_BY_PURPOSE[label.purpose]
        if label.process in _HIERARCHY_BY_PROCESS:
            return _HIERARCHY_BY_PROCESS[label.process]
        return NhfLevel7.BASIC, NpfLevel.CONSUMPTION_IMMEDIATE

    # -- behavior ---------------------------------------------------------------

    def assess_behavior(self, label: NeedLabel, context: QuerySummary) -> tuple[StressLevel, RiskLevel]:
        text = " ".join(context.queries).lower()
        stress = next(
            (level for level, cues in _STRESS_CUES if any(c in text for c in cues)),
            StressLevel.LOW,
        )
        risk = next(
            (level for level, cues in _RISK_CUES if any(self._cue_hit(text, c) for c in cues)),
            RiskLevel.UNASSIGNED,
        )
        return stress, risk

    @staticmethod
    def _cue_hit(text: str, cue: str) -> bool:
        if cue.isalpha() and len(cue) <= 3:
            return re.search(rf"\b{cue}\b", text) is not None
        return cue in text

    # -- emotion -----------------------------------------------------------------

    def score_emotion(self, post: Post) -> EmotionProfile:
        words = _WORD.findall(post.text.lower())
        counts = {
            emotion: float(sum(1 for w in words if w in lexicon))
            for emotion, lexicon in _EMOTION_LEXICON.items()
        }
        return EmotionProfile.from_counts(counts)

    # -- age/income ---------------------------------------------------------------

    def detect_age_income(self, post: Post) -> tuple[list[AgeMention], list[IncomeMention]]:
        text = post.text
        year = post.year

        ages: list[AgeMention] = []
        seen_ages: set[int] = set()
        for pattern in _AGE_PATTERNS:
            for match in pattern.finditer(text):
                age = int(match.group(1))
                if 0 < age < 120 and age not in seen_ages:
                    seen_ages.add(age)
                    ages.append(AgeMention(post_id=post.post_id, year=year, age_years=age))

        if _NON_USD.search(text):
            log.warning("post %s: non-USD income mention dropped", post.post_id)

        incomes: list[IncomeMention] = []
        for match in _USD_AMOUNT.finditer(text):
            raw = match.group(1) or match.group(3)
            suffix = (match.group(2) or match.group(4) or "").lower()
            amount = float(raw.replace(",", ""))
            if suffix == "k":
                amount *= 1_000
            elif suffix == "m":
                amount *= 1_000_000
            window = text[match.end(): match.end() + _PERIOD_WINDOW]
            period = next((name for name, marker in _PERIOD_MARKERS if marker.search(window)), None)
            if period is None or amount <= 0:
                continue
            incomes.append(IncomeMention(post_id=post.post_id, year=year, amount=amount, period=period))
        return ages, incomes
