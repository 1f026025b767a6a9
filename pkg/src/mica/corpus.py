"""CoNLL-style corpus model: tokens, sentences, documents and BIO span logic.

The file format is one token per line as ``surface<TAB>tag``, a blank line
ending each sentence and a ``-DOCSTART-<TAB>O`` line separating documents.
A file without any ``-DOCSTART-`` line holds a single document.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Literal, Optional, Sequence


class EntityType(str, Enum):
    """The four entity classes, in the fixed order used for vector layouts."""

    PER = "PER"
    PRO = "PRO"
    LOC = "LOC"
    DATE = "DATE"


ENTITY_TYPES: tuple[EntityType, ...] = tuple(EntityType)

#: The nine BIO labels, "O" first so an untrained model decodes to all-O.
LABELS: tuple[str, ...] = ("O",) + tuple(
    f"{prefix}-{t.value}" for t in ENTITY_TYPES for prefix in ("B", "I")
)

DOCSTART = "-DOCSTART-"

Layer = Literal["gold", "predicted"]


class ConllParseError(ValueError):
    """Raised for malformed CoNLL input; the message names the line."""


def _check_label(label: str) -> str:
    if label not in LABELS:
        raise ValueError(f"unknown label {label!r}; expected one of {', '.join(LABELS)}")
    return label


def label_entity_type(label: str) -> Optional[EntityType]:
    """Entity type of a B-/I- label, or None for "O"."""
    if label == "O":
        return None
    return EntityType(label[2:])


def repair_bio(labels: Sequence[str]) -> tuple[list[str], int]:
    """Rewrite I-T tags that lack a valid opener as B-T.

    Returns the repaired sequence and the number of rewritten tags. This is
    the usual CoNLL-community convention; real annotated data contains such
    noise and rejecting it outright would make whole files unusable.
    """
    repaired: list[str] = []
    repairs = 0
    prev = "O"
    for label in labels:
        if label.startswith("I-") and prev not in (f"B-{label[2:]}", f"I-{label[2:]}"):
            label = "B-" + label[2:]
            repairs += 1
        repaired.append(label)
        prev = label
    return repaired, repairs


def _is_bio_valid(labels: Sequence[str]) -> bool:
    prev = "O"
    for label in labels:
        if label.startswith("I-") and prev not in (f"B-{label[2:]}", f"I-{label[2:]}"):
            return False
        prev = label
    return True


@dataclass(frozen=True)
class Token:
    """One surface form with optional gold and predicted BIO labels."""

    surface: str
    gold_label: Optional[str] = None
    predicted_label: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"token surface must be non-empty without whitespace: {self.surface!r}")
        for label in (self.gold_label, self.predicted_label):
            if label is not None:
                _check_label(label)


@dataclass(frozen=True)
class Sentence:
    """A non-empty token sequence; gold labels, when complete, are BIO-valid."""

    tokens: tuple[Token, ...]
    index_in_document: int = 0

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")
        if self.index_in_document < 0:
            raise ValueError("index_in_document must be non-negative")
        gold = self.gold_labels
        if gold is not None and not _is_bio_valid(gold):
            raise ValueError(f"gold label sequence is not BIO-valid: {gold}")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    def _layer(self, which: Layer) -> Optional[tuple[str, ...]]:
        labels = tuple(
            t.gold_label if which == "gold" else t.predicted_label for t in self.tokens
        )
        return None if any(l is None for l in labels) else labels  # type: ignore[return-value]

    @property
    def gold_labels(self) -> Optional[tuple[str, ...]]:
        return self._layer("gold")

    @property
    def predicted_labels(self) -> Optional[tuple[str, ...]]:
        return self._layer("predicted")

    def with_predicted(self, labels: Sequence[str]) -> "Sentence":
        """Copy of this sentence carrying `labels` as the predicted layer."""
        if len(labels) != len(self.tokens):
            raise ValueError(f"expected {len(self.tokens)} labels, got {len(labels)}")
        tokens = tuple(
            Token(t.surface, t.gold_label, _check_label(lab))
            for t, lab in zip(self.tokens, labels)
        )
        return Sentence(tokens, self.index_in_document)

    def with_gold(self, labels: Sequence[str]) -> "Sentence":
        """Copy of this sentence carrying `labels` as the gold layer."""
        if len(labels) != len(self.tokens):
            raise ValueError(f"expected {len(self.tokens)} labels, got {len(labels)}")
        tokens = tuple(
            Token(t.surface, _check_label(lab), t.predicted_label)
            for t, lab in zip(self.tokens, labels)
        )
        return Sentence(tokens, self.index_in_document)


@dataclass(frozen=True)
class Document:
    """An ordered run of sentences; context windows never cross documents."""

    sentences: tuple[Sentence, ...]
    doc_id: str = ""

    def __post_init__(self) -> None:
        for i, sent in enumerate(self.sentences):
            if sent.index_in_document != i:
                raise ValueError(
                    f"sentence indices must be contiguous from 0; "
                    f"got {sent.index_in_document} at position {i}"
                )

    def __len__(self) -> int:
        return len(self.sentences)

    def with_predicted(self, labels_per_sentence: Sequence[Sequence[str]]) -> "Document":
        if len(labels_per_sentence) != len(self.sentences):
            raise ValueError("one label sequence per sentence required")
        return Document(
            tuple(s.with_predicted(l) for s, l in zip(self.sentences, labels_per_sentence)),
            self.doc_id,
        )


@dataclass(frozen=True)
class Corpus:
    """A document collection plus the BIO repair count from parsing."""

    documents: tuple[Document, ...] = ()
    repair_count: int = 0

    def __len__(self) -> int:
        return len(self.documents)

    def sentences(self) -> Iterator[Sentence]:
        for doc in self.documents:
            yield from doc.sentences

    def with_predicted(
        self, labels_per_document: Sequence[Sequence[Sequence[str]]]
    ) -> "Corpus":
        if len(labels_per_document) != len(self.documents):
            raise ValueError("one prediction block per document required")
        return Corpus(
            tuple(d.with_predicted(l) for d, l in zip(self.documents, labels_per_document)),
            self.repair_count,
        )


@dataclass(frozen=True)
class EntitySpan:
    """A typed contiguous mention: token range [start, end) within one sentence."""

    entity_type: EntityType
    start: int
    end: int
    surface: str

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"need 0 <= start < end, got [{self.start}, {self.end})")


def spans_from_labels(surfaces: Sequence[str], labels: Sequence[str]) -> list[EntitySpan]:
    """Decode BIO labels to spans: maximal B-T (I-T)* runs, sorted by start.

    An I-T without a valid opener (possible in raw model output, which is not
    BIO-constrained) opens a new span, mirroring `repair_bio`.
    """
    if len(surfaces) != len(labels):
        raise ValueError("surfaces and labels must have the same length")
    spans: list[EntitySpan] = []
    start: Optional[int] = None
    current: Optional[EntityType] = None

    def close(end: int) -> None:
        nonlocal start, current
        if start is not None and current is not None:
            spans.append(EntitySpan(current, start, end, " ".join(surfaces[start:end])))
        start, current = None, None

    for i, label in enumerate(labels):
        _check_label(label)
        etype = label_entity_type(label)
        if label == "O":
            close(i)
        elif label.startswith("B-") or etype != current:
            close(i)
            start, current = i, etype
    close(len(labels))
    return spans


def spans_from_bio(sentence: Sentence, which: Layer = "gold") -> list[EntitySpan]:
    """Entity spans of one label layer of a sentence."""
    labels = sentence._layer(which)
    if labels is None:
        raise ValueError(f"sentence has no complete {which} label layer")
    return spans_from_labels(sentence.surfaces, labels)


def bio_from_spans(length: int, spans: Sequence[EntitySpan]) -> list[str]:
    """Inverse of span extraction: lay non-overlapping spans onto an O field."""
    labels = ["O"] * length
    for span in sorted(spans, key=lambda s: s.start):
        if span.end > length:
            raise ValueError(f"span [{span.start}, {span.end}) exceeds length {length}")
        if any(labels[i] != "O" for i in range(span.start, span.end)):
            raise ValueError(f"span [{span.start}, {span.end}) overlaps an earlier span")
        labels[span.start] = f"B-{span.entity_type.value}"
        for i in range(span.start + 1, span.end):
            labels[i] = f"I-{span.entity_type.value}"
    return labels


def parse_conll(text: str) -> Corpus:
    """Parse CoNLL text into a corpus, repairing malformed BIO tags.

    Unknown tags raise `ConllParseError` naming the line; an empty input
    yields an empty corpus. The number of repaired tags is reported on the
    returned corpus.
    """
    documents: list[Document] = []
    sentences: list[Sentence] = []
    pending: list[tuple[str, str]] = []
    repairs = 0

    def flush_sentence() -> None:
        nonlocal repairs
        if not pending:
            return
        labels, n = repair_bio([lab for _, lab in pending])
        repairs += n
        tokens = tuple(Token(surface, label) for (surface, _), label in zip(pending, labels))
        sentences.append(Sentence(tokens, len(sentences)))
        pending.clear()

    def flush_document() -> None:
        flush_sentence()
        if sentences:
            documents.append(Document(tuple(sentences), f"d{len(documents):04d}"))
            sentences.clear()

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush_sentence()
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ConllParseError(
                f"line {lineno}: expected 'surface<TAB>tag', got {line!r}"
            )
        surface, tag = parts
        if surface == DOCSTART:
            flush_document()
            continue
        if tag not in LABELS:
            raise ConllParseError(f"line {lineno}: unknown tag {tag!r}")
        if not surface or any(c.isspace() for c in surface):
            raise ConllParseError(f"line {lineno}: bad token surface {surface!r}")
        pending.append((surface, tag))
    flush_document()
    return Corpus(tuple(documents), repairs)


def write_conll(corpus: Corpus, which: Layer = "gold") -> str:
    """Serialize one label layer back to CoNLL text.

    Canonical form: one blank line between sentences, a ``-DOCSTART-`` line
    between (not before) documents, trailing newline. `parse_conll` of the
    result reproduces the corpus exactly.
    """
    blocks: list[str] = []
    for d, doc in enumerate(corpus.documents):
        if d > 0:
            blocks.append(f"{DOCSTART}\tO")
        for sent in doc.sentences:
            labels = sent._layer(which)
            if labels is None:
                raise ValueError(
                    f"document {doc.doc_id!r}, sentence {sent.index_in_document}: "
                    f"no complete {which} label layer to write"
                )
            blocks.append(
                "\n".join(f"{t.surface}\t{lab}" for t, lab in zip(sent.tokens, labels))
            )
    return "\n\n".join(blocks) + "\n" if blocks else ""


def load_conll(path: str | Path) -> Corpus:
    return parse_conll(Path(path).read_text(encoding="utf-8"))


def dump_conll(corpus: Corpus, path: str | Path, which: Layer = "gold") -> None:
    Path(path).write_text(write_conll(corpus, which), encoding="utf-8")
