"""Handcrafted per-token feature templates for the CRF.

The template set is the classic CoNLL-2002 tutorial one minus part-of-speech
features: bias, lowercased form, 2/3-character suffixes and shape flags for
the current token, the non-suffix templates for the +-1 neighbors, and
boundary flags. Every emitted value is 1.0; keys follow the grammar
documented in the README and referenced verbatim by serialized models.
"""

from __future__ import annotations

from .corpus import Sentence

#: Sparse feature map for one token position.
FeatureVector = dict[str, float]


def _is_title(word: str) -> bool:
    # Initial capital, rest lowercase; Unicode-aware so É/é behave.
    return word[0].isupper() and word[1:] == word[1:].lower()


def _flag_features(word: str, prefix: str = "") -> list[str]:
    keys = [prefix + "bias", f"{prefix}w.lower={word.lower()}"]
    if word.isupper():
        keys.append(prefix + "w.isupper")
    if _is_title(word):
        keys.append(prefix + "w.istitle")
    if word.isdigit():
        keys.append(prefix + "w.isdigit")
    return keys


def extract_features(sentence: Sentence, position: int) -> FeatureVector:
    """Feature vector for one position; depends only on tokens at +-1."""
    n = len(sentence)
    if not 0 <= position < n:
        raise IndexError(f"position {position} out of range for sentence of length {n}")
    word = sentence.tokens[position].surface

    keys = _flag_features(word)
    keys.append(f"suffix3={word[-3:]}")
    keys.append(f"suffix2={word[-2:]}")
    if position > 0:
        keys.extend(_flag_features(sentence.tokens[position - 1].surface, "-1:"))
    else:
        keys.append("BOS")
    if position < n - 1:
        keys.extend(_flag_features(sentence.tokens[position + 1].surface, "+1:"))
    else:
        keys.append("EOS")
    return {key: 1.0 for key in keys}


def sentence_features(sentence: Sentence) -> list[FeatureVector]:
    """Feature vectors for every position of a sentence."""
    return [extract_features(sentence, i) for i in range(len(sentence))]
