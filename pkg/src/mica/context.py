"""Contextual entity dictionaries and per-type similarity features.

First-pass predictions inside a sentence window become per-type candidate
lists; each word is then scored against every list with two string
similarities, and the resulting four-value vector is appended to the word's
handcrafted features for the second-pass CRF. Candidates are case-folded,
so downstream matching is case-insensitive; the CRF still sees case through
its shape flags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

from .corpus import ENTITY_TYPES, Document, EntityType, spans_from_labels
from .features import FeatureVector
from .strsim import lcs_similarity, lev_similarity

#: Feature keys carrying the per-type similarity scores, in layout order.
SIMILARITY_KEYS: tuple[str, ...] = tuple(f"sim:{t.value}" for t in ENTITY_TYPES)


def fold(word: str) -> str:
    """Unicode-aware lowercasing used for all candidate matching."""
    return word.lower()


class SimilarityVector(NamedTuple):
    """Per-type potentiality scores, each in [0, 2]; 0 when no candidates."""

    per: float = 0.0
    pro: float = 0.0
    loc: float = 0.0
    date: float = 0.0

    def for_type(self, entity_type: EntityType) -> float:
        return self[ENTITY_TYPES.index(entity_type)]


@dataclass(frozen=True)
class EntityDictionary:
    """Per-type candidate strings, case-folded, deduplicated and non-empty."""

    candidates: Mapping[EntityType, tuple[str, ...]] = field(
        default_factory=lambda: {t: () for t in ENTITY_TYPES}
    )

    def __post_init__(self) -> None:
        for entity_type in ENTITY_TYPES:
            values = self.candidates.get(entity_type, ())
            if len(set(values)) != len(values):
                raise ValueError(f"duplicate {entity_type.value} candidates")
            if any(not c for c in values):
                raise ValueError(f"empty {entity_type.value} candidate")

    @classmethod
    def build(cls, raw: Mapping[EntityType, Iterable[str]]) -> "EntityDictionary":
        """Fold, deduplicate and sort raw candidate strings per type."""
        return cls(
            {
                t: tuple(sorted({fold(c) for c in raw.get(t, ()) if c}))
                for t in ENTITY_TYPES
            }
        )

    def for_type(self, entity_type: EntityType) -> tuple[str, ...]:
        return self.candidates.get(entity_type, ())

    def is_empty(self) -> bool:
        return all(not self.for_type(t) for t in ENTITY_TYPES)


EMPTY_DICTIONARY = EntityDictionary()


@dataclass(frozen=True)
class ContextConfig:
    """Sentence neighborhood: `window` sentences on each side, clipped at
    document boundaries, plus the current sentence unless excluded."""

    window: int = 0
    include_current: bool = True

    def __post_init__(self) -> None:
        if self.window < 0:
            raise ValueError("window must be non-negative")


def build_dictionary(
    document: Document,
    sentence_index: int,
    predictions: Sequence[Sequence[str]],
    config: ContextConfig = ContextConfig(),
) -> EntityDictionary:
    """Candidate dictionary for one sentence from nearby predicted entities.

    Every predicted span in the window contributes both its full surface and
    each of its tokens, so merged-token typos can match whole mentions while
    multi-word names still expose their parts. Gold labels are never read.
    """
    n = len(document.sentences)
    if not 0 <= sentence_index < n:
        raise IndexError(f"sentence index {sentence_index} out of range for {n} sentences")
    if len(predictions) != n:
        raise ValueError(f"expected predictions for all {n} sentences, got {len(predictions)}")

    raw: dict[EntityType, list[str]] = {t: [] for t in ENTITY_TYPES}
    low = max(0, sentence_index - config.window)
    high = min(n - 1, sentence_index + config.window)
    for i in range(low, high + 1):
        if i == sentence_index and not config.include_current:
            continue
        sentence = document.sentences[i]
        labels = predictions[i]
        if len(labels) != len(sentence):
            raise ValueError(
                f"sentence {i}: {len(sentence)} tokens but {len(labels)} predicted labels"
            )
        for span in spans_from_labels(sentence.surfaces, labels):
            raw[span.entity_type].append(span.surface)
            raw[span.entity_type].extend(sentence.surfaces[span.start : span.end])
    return EntityDictionary.build(raw)


@lru_cache(maxsize=1 << 18)
def _pair_similarity(word: str, candidate: str) -> float:
    return lev_similarity(word, candidate)


@lru_cache(maxsize=1 << 18)
def _pair_substring(word: str, candidate: str) -> float:
    return lcs_similarity(word, candidate)


def similarity_vector(word: str, dictionary: EntityDictionary) -> SimilarityVector:
    """Score a word against each type's candidates.

    For a non-empty list the score is the best edit similarity plus the
    substring similarity to the candidate attaining it (ties resolved to the
    shortest, then lexicographically smallest candidate, so list order never
    matters); empty lists score 0.
    """
    folded = fold(word)
    scores = []
    for entity_type in ENTITY_TYPES:
        candidates = dictionary.for_type(entity_type)
        if not candidates:
            scores.append(0.0)
            continue
        best = max(_pair_similarity(folded, c) for c in candidates)
        closest = min(
            (c for c in candidates if _pair_similarity(folded, c) == best),
            key=lambda c: (len(c), c),
        )
        scores.append(best + _pair_substring(folded, closest))
    return SimilarityVector(*scores)


def enrich(features: FeatureVector, similarities: SimilarityVector) -> FeatureVector:
    """Copy of `features` with the four sim:* keys appended.

    The keys must not already be present; enriching twice is an error.
    """
    for key in SIMILARITY_KEYS:
        if key in features:
            raise ValueError(f"feature vector already contains {key!r}")
    enriched = dict(features)
    enriched.update(zip(SIMILARITY_KEYS, similarities))
    return enriched
