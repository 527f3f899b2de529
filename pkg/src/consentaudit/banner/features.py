"""17-dimensional featurization of candidate elements.

Layout of the vector (fixed; every consumer relies on it):
  [0..11]  G1: unigram/bigram/keyword occurrence counts for each of
           aria-label, class, id, inner text (3 counters x 4 attributes)
  [12..13] G2: 1 iff the token count of aria-label / inner text exceeds
           the threshold (long marketing copy is not a button label)
  [14..16] G3: 1 iff a consent-library API token appears in class or id /
           href / onclick
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .candidates import CandidateElement

FEATURE_DIM = 17
FeatureVector = tuple[float, ...]

_G1_SOURCES = ("aria-label", "class", "id", "text")
_G2_SOURCES = ("aria-label", "text")


@dataclass(frozen=True)
class Vocabulary:
    unigrams: frozenset[str]
    bigrams: frozenset[str]
    keywords: frozenset[str]
    api_tokens: tuple[str, ...]
    token_threshold: int

    def to_dict(self) -> dict:
        return {
            "unigrams": sorted(self.unigrams),
            "bigrams": sorted(self.bigrams),
            "keywords": sorted(self.keywords),
            "api_tokens": list(self.api_tokens),
            "token_threshold": self.token_threshold,
        }

    @staticmethod
    def from_dict(data: dict) -> "Vocabulary":
        return Vocabulary(
            unigrams=frozenset(_stem(t) for t in data["unigrams"]),
            bigrams=frozenset(_stem_phrase(p) for p in data["bigrams"]),
            keywords=frozenset(_stem_phrase(p) for p in data["keywords"]),
            api_tokens=tuple(t.lower() for t in data["api_tokens"]),
            token_threshold=int(data["token_threshold"]),
        )

    def content_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@lru_cache(maxsize=1)
def default_vocabulary() -> Vocabulary:
    text = (
        resources.files("consentaudit")
        .joinpath("data/button_vocab.json")
        .read_text(encoding="utf-8")
    )
    return Vocabulary.from_dict(json.loads(text))


def _stem(token: str) -> str:
    # light plural folding so "settings" counts as "setting"
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


def _stem_phrase(phrase: str) -> str:
    return " ".join(_stem(t) for t in phrase.lower().split())


def tokenize(text: str) -> list[str]:
    return [t for t in re.split(r"[^0-9a-z]+", text.lower()) if t]


def _ngram_counts(text: str, vocab: Vocabulary) -> tuple[float, float, float]:
    tokens = [_stem(t) for t in tokenize(text)]
    unigram_hits = sum(1 for t in tokens if t in vocab.unigrams)
    bigram_hits = 0
    keyword_hits = 0
    for first, second in zip(tokens, tokens[1:]):
        pair = f"{first} {second}"
        if pair in vocab.bigrams:
            bigram_hits += 1
        if pair in vocab.keywords:
            keyword_hits += 1
    return (float(unigram_hits), float(bigram_hits), float(keyword_hits))


def _source_text(candidate: CandidateElement, source: str) -> str:
    if source == "text":
        return candidate.inner_text
    return candidate.attributes.get(source, "")


def _has_api_token(text: str, vocab: Vocabulary) -> bool:
    lowered = text.lower()
    return any(token in lowered for token in vocab.api_tokens)


def featurize(
    candidate: CandidateElement, vocab: Vocabulary | None = None
) -> FeatureVector:
    vocab = vocab or default_vocabulary()
    values: list[float] = []
    for source in _G1_SOURCES:
        values.extend(_ngram_counts(_source_text(candidate, source), vocab))
    for source in _G2_SOURCES:
        count = len(tokenize(_source_text(candidate, source)))
        values.append(1.0 if count > vocab.token_threshold else 0.0)
    class_and_id = " ".join(
        (candidate.attributes.get("class", ""), candidate.attributes.get("id", ""))
    )
    for text in (
        class_and_id,
        candidate.attributes.get("href", ""),
        candidate.attributes.get("onclick", ""),
    ):
        values.append(1.0 if _has_api_token(text, vocab) else 0.0)
    assert len(values) == FEATURE_DIM
    return tuple(values)
