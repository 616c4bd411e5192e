"""Need-text preprocessing for topic modeling.

Text is lowercased, punctuation-stripped and stopword-filtered; tokens
shorter than 2 characters are dropped and the vocabulary keeps only terms
seen at least twice corpus-wide. Needs left with no tokens are excluded from
modeling but counted, so downstream tables can report them explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from ..errors import ModelingError

MIN_TOKEN_LEN = 2
MIN_TERM_FREQ = 2

_TOKEN = re.compile(r"[a-z0-9]+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("needscope.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


@dataclass(frozen=True, slots=True)
class TokenizedNeed:
    need_id: str
    tokens: tuple[int, ...]  # vocabulary indices


@dataclass(slots=True)
class TokenizedCorpus:
    vocabulary: list[str]
    needs: list[TokenizedNeed]
    excluded_need_ids: list[str]

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    @property
    def n_tokens(self) -> int:
        return sum(len(n.tokens) for n in self.needs)


def normalize_text(text: str) -> list[str]:
    """Lowercase, strip punctuation and stopwords, keep tokens of length >= 2."""
    return [
        tok
        for tok in _TOKEN.findall(text.lower())
        if len(tok) >= MIN_TOKEN_LEN and tok not in STOPWORDS
    ]


def tokenize(need_texts: dict[str, str] | list[tuple[str, str]]) -> TokenizedCorpus:
    """Build the vocabulary and index-encoded needs from (need_id, text) pairs.

    Vocabulary indices follow first appearance among terms that meet the
    corpus-frequency threshold, so two needs sharing no terms occupy disjoint
    index ranges.
    """
    pairs = list(need_texts.items()) if isinstance(need_texts, dict) else list(need_texts)
    raw_tokens = [(need_id, normalize_text(text)) for need_id, text in pairs]

    freq: dict[str, int] = {}
    for _, tokens in raw_tokens:
        for tok in tokens:
            freq[tok] = freq.get(tok, 0) + 1

    index: dict[str, int] = {}
    vocabulary: list[str] = []
    needs: list[TokenizedNeed] = []
    excluded: list[str] = []
    for need_id, tokens in raw_tokens:
        encoded: list[int] = []
        for tok in tokens:
            if freq[tok] < MIN_TERM_FREQ:
                continue
            if tok not in index:
                index[tok] = len(vocabulary)
                vocabulary.append(tok)
            encoded.append(index[tok])
        if encoded:
            needs.append(TokenizedNeed(need_id=need_id, tokens=tuple(encoded)))
        else:
            excluded.append(need_id)

    if pairs and not vocabulary:
        raise ModelingError("corpus too small: empty vocabulary after preprocessing")
    return TokenizedCorpus(vocabulary=vocabulary, needs=needs, excluded_need_ids=excluded)


def need_text(purpose: str, process: str, core_query: str) -> str:
    """Text used for topic modeling: the label alone is too short to be stable."""
    return f"{purpose} {process} {core_query}"
