"""Shared fixtures and small random-model helpers."""

from __future__ import annotations

import numpy as np
import pytest

from mica.corpus import Corpus, parse_conll
from mica.crf import CrfModel

TINY_CONLL = (
    "Jean\tB-PER\n"
    "Dupont\tI-PER\n"
    "est\tO\n"
    "présent\tO\n"
    "\n"
    "Dupont\tB-PER\n"
    "habite\tO\n"
    "Paris\tB-LOC\n"
    "\n"
    "-DOCSTART-\tO\n"
    "\n"
    "Marie\tB-PER\n"
    "née\tO\n"
    "le\tO\n"
    "3\tB-DATE\n"
    "mars\tI-DATE\n"
    "1990\tI-DATE\n"
)


@pytest.fixture
def tiny_corpus() -> Corpus:
    return parse_conll(TINY_CONLL)


def make_random_model(
    rng: np.random.Generator, n_labels: int, n_features: int, scale: float = 2.0
) -> CrfModel:
    labels = tuple(f"L{i}" for i in range(n_labels))
    keys = tuple(f"f{i}" for i in range(n_features))
    return CrfModel(
        labels,
        {k: i for i, k in enumerate(keys)},
        rng.uniform(-scale, scale, (n_features, n_labels)),
        rng.uniform(-scale, scale, (n_labels, n_labels)),
    )


def random_features(
    rng: np.random.Generator, length: int, keys: list[str]
) -> list[dict[str, float]]:
    seqs = []
    for _ in range(length):
        chosen = rng.choice(len(keys), size=rng.integers(1, len(keys) + 1), replace=False)
        seqs.append({keys[i]: float(rng.uniform(-1.5, 1.5)) for i in chosen})
    return seqs
