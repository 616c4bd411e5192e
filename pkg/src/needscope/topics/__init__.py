"""LDA topic modeling with skewness-based selection of the topic count."""

from .gibbs import (
    LdaModel,
    TopicDistribution,
    dominant_topic_assignment,
    gibbs_train,
    infer_distributions,
    load_model,
    save_model,
)
from .select import SelectionResult, chain_seed, default_alpha, run_selection_scan, select_k
from .skew import SkewReport, skewness
from .tokenize import STOPWORDS, TokenizedCorpus, TokenizedNeed, need_text, normalize_text, tokenize

__all__ = [
    "LdaModel",
    "SelectionResult",
    "SkewReport",
    "STOPWORDS",
    "TokenizedCorpus",
    "TokenizedNeed",
    "TopicDistribution",
    "chain_seed",
    "default_alpha",
    "dominant_topic_assignment",
    "gibbs_train",
    "infer_distributions",
    "load_model",
    "need_text",
    "normalize_text",
    "run_selection_scan",
    "save_model",
    "select_k",
    "skewness",
    "tokenize",
]
