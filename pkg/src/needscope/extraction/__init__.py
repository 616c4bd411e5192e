"""Pluggable extraction: rule-based reference engine and LLM-backed engine."""

from .cache import ResponseCache, cache_key
from .client import LlmClient
from .engine import CAPABILITIES, ExtractionEngine
from .llm_engine import LlmEngine
from .prompts import PROMPT_VERSION
from .rule_engine import RULE_VERSION, RuleEngine
from .runner import extract_corpus, extract_post
from .schemas import SCHEMAS, validate_payload
from .types import (
    EMOTIONS,
    EmotionProfile,
    EngineConfig,
    NeedLabel,
    NeedRecord,
    NhfLevel5,
    NhfLevel7,
    NpfLevel,
    QuerySummary,
    RiskLevel,
    StressLevel,
    collapse_nhf7,
)

__all__ = [
    "CAPABILITIES",
    "EMOTIONS",
    "EmotionProfile",
    "EngineConfig",
    "ExtractionEngine",
    "LlmClient",
    "LlmEngine",
    "NeedLabel",
    "NeedRecord",
    "NhfLevel5",
    "NhfLevel7",
    "NpfLevel",
    "PROMPT_VERSION",
    "QuerySummary",
    "ResponseCache",
    "RiskLevel",
    "RULE_VERSION",
    "RuleEngine",
    "SCHEMAS",
    "StressLevel",
    "cache_key",
    "collapse_nhf7",
    "extract_corpus",
    "extract_post",
    "validate_payload",
]
