"""Seeded corruption of corpora for typo-robustness measurements.

Each targeted token is independently corrupted with the configured
probability by one uniformly chosen enabled operation. All operations keep
the sentence and label structure intact except `merge_space`, which glues a
token to its right neighbor the way a missing space would, keeping the
entity span recoverable through its tag rule.
"""

from __future__ import annotations

import csv
import io
import random
import string
from dataclasses import dataclass
from typing import Literal, Optional

from .corpus import Corpus, Document, Sentence, Token, repair_bio

OPERATIONS: tuple[str, ...] = ("substitute", "delete", "insert", "transpose", "merge_space")

Target = Literal["entities_only", "all_tokens"]


@dataclass(frozen=True)
class TypoConfig:
    """Corruption rate, enabled operations, targeting rule and RNG seed.

    The default rate of 0.15 mirrors the noise share reported for real
    search-engine queries.
    """

    rate: float = 0.15
    operations: tuple[str, ...] = OPERATIONS
    target: Target = "entities_only"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must be in [0, 1]")
        if not self.operations:
            raise ValueError("at least one operation must be enabled")
        unknown = set(self.operations) - set(OPERATIONS)
        if unknown:
            raise ValueError(f"unknown operations: {sorted(unknown)}")
        if self.target not in ("entities_only", "all_tokens"):
            raise ValueError(f"unknown target {self.target!r}")


@dataclass(frozen=True)
class Corruption:
    """One applied corruption; `position` is the token index in the output."""

    doc_id: str
    sentence: int
    position: int
    operation: str
    before: str
    after: str


def _merged_label(left: Optional[str], right: Optional[str]) -> Optional[str]:
    # Leftmost tag wins, except an O swallowing an entity opener adopts it,
    # which keeps the span recoverable after a missing space.
    if left == "O" and right is not None and right.startswith("B-"):
        return right
    return left


def _corrupt_sentence(
    doc_id: str,
    sentence: Sentence,
    config: TypoConfig,
    rng: random.Random,
    log: list[Corruption],
) -> Sentence:
    entries: list[tuple[str, Optional[str], Optional[str]]] = [
        (t.surface, t.gold_label, t.predicted_label) for t in sentence.tokens
    ]
    i = 0
    while i < len(entries):
        surface, gold, predicted = entries[i]
        targeted = config.target == "all_tokens" or (gold is not None and gold != "O")
        if targeted and rng.random() < config.rate:
            op = config.operations[rng.randrange(len(config.operations))]
            if op == "substitute":
                pos = rng.randrange(len(surface))
                letter = rng.choice(string.ascii_lowercase)
                after = surface[:pos] + letter + surface[pos + 1 :]
                entries[i] = (after, gold, predicted)
                log.append(Corruption(doc_id, sentence.index_in_document, i, op, surface, after))
            elif op == "delete":
                if len(surface) > 1:
                    pos = rng.randrange(len(surface))
                    after = surface[:pos] + surface[pos + 1 :]
                    entries[i] = (after, gold, predicted)
                    log.append(Corruption(doc_id, sentence.index_in_document, i, op, surface, after))
            elif op == "insert":
                pos = rng.randrange(len(surface) + 1)
                letter = rng.choice(string.ascii_lowercase)
                after = surface[:pos] + letter + surface[pos:]
                entries[i] = (after, gold, predicted)
                log.append(Corruption(doc_id, sentence.index_in_document, i, op, surface, after))
            elif op == "transpose":
                if len(surface) > 1:
                    pos = rng.randrange(len(surface) - 1)
                    after = surface[:pos] + surface[pos + 1] + surface[pos] + surface[pos + 2 :]
                    entries[i] = (after, gold, predicted)
                    log.append(Corruption(doc_id, sentence.index_in_document, i, op, surface, after))
            elif op == "merge_space":
                if i + 1 < len(entries):
                    next_surface, next_gold, next_predicted = entries.pop(i + 1)
                    after = surface + next_surface
                    entries[i] = (
                        after,
                        _merged_label(gold, next_gold),
                        _merged_label(predicted, next_predicted),
                    )
                    log.append(
                        Corruption(
                            doc_id,
                            sentence.index_in_document,
                            i,
                            op,
                            f"{surface} {next_surface}",
                            after,
                        )
                    )
        i += 1

    golds = [gold for _, gold, _ in entries]
    if all(g is not None for g in golds):
        # Merging adjacent spans can orphan an I-* tag; repair as parsing would.
        golds, _ = repair_bio(golds)  # type: ignore[arg-type]
    tokens = tuple(
        Token(surface, gold, predicted)
        for (surface, _, predicted), gold in zip(entries, golds)
    )
    return Sentence(tokens, sentence.index_in_document)


def inject(corpus: Corpus, config: TypoConfig) -> tuple[Corpus, list[Corruption]]:
    """Corrupt a corpus; returns the new corpus and the corruption log.

    Deterministic for a fixed seed: tokens are visited in order and the RNG
    stream is consumed sequentially. Tokens outside the target set are left
    untouched (though `merge_space` may swallow a following one).
    """
    rng = random.Random(config.seed)
    log: list[Corruption] = []
    documents = []
    for doc in corpus.documents:
        sentences = tuple(
            _corrupt_sentence(doc.doc_id, sentence, config, rng, log)
            for sentence in doc.sentences
        )
        documents.append(Document(sentences, doc.doc_id))
    return Corpus(tuple(documents), corpus.repair_count), log


def corruption_log_csv(log: list[Corruption]) -> str:
    """Render the corruption log as CSV."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["doc_id", "sentence", "position", "operation", "before", "after"])
    for c in log:
        writer.writerow([c.doc_id, c.sentence, c.position, c.operation, c.before, c.after])
    return buffer.getvalue()
