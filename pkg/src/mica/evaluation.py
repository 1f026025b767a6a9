"""Entity-level scoring and sweep reporting.

Matching is strict: a predicted span counts as a true positive only when a
gold span with the same type and token range exists in the same sentence.
"Accuracy" here is the Jaccard-style ratio TP / (TP + FP + FN), not token
accuracy.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .corpus import ENTITY_TYPES, Corpus, EntityType, spans_from_bio


def _ratio(num: int, denom: int) -> float:
    return num / denom if denom else 0.0


@dataclass(frozen=True)
class Counts:
    """Span match counts with the derived metrics, 0 on empty denominators."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp, self.tp + self.fp + self.fn)

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class EvalReport:
    """Micro-averaged overall counts plus the per-type breakdown."""

    overall: Counts
    per_type: Mapping[EntityType, Counts]


def score(gold: Corpus, predicted: Corpus) -> EvalReport:
    """Exact-span entity scores of `predicted`'s predicted layer against
    `gold`'s gold layer; both corpora must tokenize identically."""
    if len(gold.documents) != len(predicted.documents):
        raise ValueError(
            f"corpora differ in document count: {len(gold.documents)} vs {len(predicted.documents)}"
        )
    per_type = {t: Counts() for t in ENTITY_TYPES}
    for d, (gold_doc, pred_doc) in enumerate(zip(gold.documents, predicted.documents)):
        if len(gold_doc.sentences) != len(pred_doc.sentences):
            raise ValueError(f"document {d}: sentence counts differ")
        for s, (gold_sent, pred_sent) in enumerate(zip(gold_doc.sentences, pred_doc.sentences)):
            if len(gold_sent) != len(pred_sent):
                raise ValueError(f"document {d}, sentence {s}: token counts differ")
            for i, (gt, pt) in enumerate(zip(gold_sent.tokens, pred_sent.tokens)):
                if gt.surface != pt.surface:
                    raise ValueError(
                        f"document {d}, sentence {s}, token {i}: "
                        f"{gt.surface!r} != {pt.surface!r}"
                    )
            gold_spans = {(sp.entity_type, sp.start, sp.end) for sp in spans_from_bio(gold_sent, "gold")}
            pred_spans = {
                (sp.entity_type, sp.start, sp.end) for sp in spans_from_bio(pred_sent, "predicted")
            }
            for entity_type in ENTITY_TYPES:
                g = {sp for sp in gold_spans if sp[0] == entity_type}
                p = {sp for sp in pred_spans if sp[0] == entity_type}
                matched = len(g & p)
                per_type[entity_type] = per_type[entity_type] + Counts(
                    matched, len(p) - matched, len(g) - matched
                )
    overall = Counts()
    for counts in per_type.values():
        overall = overall + counts
    return EvalReport(overall, per_type)


class SweepRow(NamedTuple):
    """One result line: a model label, its context window, and its scores."""

    model: str
    context: int
    report: EvalReport


class SweepTables(NamedTuple):
    csv: str
    table: str


def _pct(value: float) -> str:
    return f"{100 * value:.2f}"


def sweep_report(rows: Sequence[SweepRow]) -> SweepTables:
    """Render sweep results as CSV text and an aligned plain-text table."""
    header = ["model", "context", "recall", "precision", "f1", "accuracy"]
    cells = [
        [
            row.model,
            str(row.context),
            _pct(row.report.overall.recall),
            _pct(row.report.overall.precision),
            _pct(row.report.overall.f1),
            _pct(row.report.overall.accuracy),
        ]
        for row in rows
    ]

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(cells)

    titles = ["Model", "Context", "Rec", "Prec", "F1", "Acc"]
    widths = [
        max(len(t), *(len(r[i]) for r in cells)) if cells else len(t)
        for i, t in enumerate(titles)
    ]

    def fmt(values: Sequence[str]) -> str:
        return "  ".join(
            v.ljust(w) if i == 0 else v.rjust(w)
            for i, (v, w) in enumerate(zip(values, widths))
        )

    table_lines = [fmt(titles)] + [fmt(r) for r in cells]
    return SweepTables(buffer.getvalue(), "\n".join(table_lines) + "\n")


def format_report(report: EvalReport) -> str:
    """Human-readable per-type and overall metric block."""
    lines = ["type     tp    fp    fn     rec    prec      f1     acc"]

    def row(name: str, c: Counts) -> str:
        return (
            f"{name:<7}{c.tp:>4}{c.fp:>6}{c.fn:>6}"
            f"{_pct(c.recall):>8}{_pct(c.precision):>8}{_pct(c.f1):>8}{_pct(c.accuracy):>8}"
        )
    for entity_type in ENTITY_TYPES:
        lines.append(row(entity_type.value, report.per_type[entity_type]))
    lines.append(row("ALL", report.overall))
    return "\n".join(lines) + "\n"
