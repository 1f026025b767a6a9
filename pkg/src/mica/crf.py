"""Linear-chain conditional random field over sparse real-valued features.

A model is an emission weight per (feature key, label) pair plus a dense
label-transition matrix; a sequence is scored as the sum of per-position
emission scores and adjacent-label transition scores. Training maximizes
L2-regularized conditional likelihood with mini-batch SGD. Feature keys
never seen in training carry weight zero at inference.

Viterbi output is not BIO-constrained; invalid transitions are learned,
not forbidden, and span extraction downstream repairs them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .features import FeatureVector

logger = logging.getLogger(__name__)

MODEL_FORMAT_HEADER = "mica-crf v1"


class ModelFormatError(ValueError):
    """Raised when a model file cannot be read; the message names the line."""


@dataclass
class CrfModel:
    """Weights of a linear-chain CRF.

    `emissions[feature_index[key], i]` is the weight of (key, labels[i]);
    `transitions[i, j]` scores labels[i] -> labels[j]. The feature vocabulary
    is exactly the keys of `feature_index`. Models are mutated only by
    `train`; afterwards they may be shared freely across threads.
    """

    labels: tuple[str, ...]
    feature_index: dict[str, int]
    emissions: np.ndarray
    transitions: np.ndarray

    def __post_init__(self) -> None:
        n_labels = len(self.labels)
        if self.emissions.shape != (len(self.feature_index), n_labels):
            raise ValueError(
                f"emissions shape {self.emissions.shape} does not match "
                f"{len(self.feature_index)} features x {n_labels} labels"
            )
        if self.transitions.shape != (n_labels, n_labels):
            raise ValueError("transitions must be square over the label set")
        self._label_index = {label: i for i, label in enumerate(self.labels)}
        if len(self._label_index) != n_labels:
            raise ValueError("duplicate labels in label set")

    @classmethod
    def zeros(cls, labels: Sequence[str], feature_keys: Sequence[str]) -> "CrfModel":
        index = {key: i for i, key in enumerate(feature_keys)}
        return cls(
            tuple(labels),
            index,
            np.zeros((len(index), len(labels))),
            np.zeros((len(labels), len(labels))),
        )

    @property
    def feature_vocabulary(self) -> frozenset[str]:
        return frozenset(self.feature_index)

    def label_index(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise ValueError(f"label {label!r} not in model label set {self.labels}") from None

    def emission_weight(self, key: str, label: str) -> float:
        row = self.feature_index.get(key)
        return 0.0 if row is None else float(self.emissions[row, self.label_index(label)])


@dataclass(frozen=True)
class TrainConfig:
    """SGD hyperparameters; identical config and data give identical weights.

    Defaults are tuned for desk-scale corpora and are artifact choices, not
    reported values.
    """

    epochs: int = 30
    learning_rate: float = 0.1
    l2: float = 1e-4
    batch_size: int = 8
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class CrfGradient(NamedTuple):
    """Gradient arrays shaped like the model's emission/transition weights."""

    emissions: np.ndarray
    transitions: np.ndarray


class _Encoded(NamedTuple):
    """One sequence resolved against a model's vocabulary and label set."""

    rows: list[np.ndarray]
    vals: list[np.ndarray]
    gold: Optional[np.ndarray]


def _encode(
    model: CrfModel,
    features: Sequence[FeatureVector],
    labels: Optional[Sequence[str]] = None,
) -> _Encoded:
    rows, vals = [], []
    for fv in features:
        pairs = [(model.feature_index[k], v) for k, v in fv.items() if k in model.feature_index]
        rows.append(np.fromiter((r for r, _ in pairs), dtype=np.intp, count=len(pairs)))
        vals.append(np.fromiter((v for _, v in pairs), dtype=np.float64, count=len(pairs)))
    gold = None
    if labels is not None:
        gold = np.fromiter((model.label_index(l) for l in labels), dtype=np.intp, count=len(labels))
    return _Encoded(rows, vals, gold)


def _emission_matrix(model: CrfModel, enc: _Encoded) -> np.ndarray:
    scores = np.zeros((len(enc.rows), len(model.labels)))
    for i, (rows, vals) in enumerate(zip(enc.rows, enc.vals)):
        if len(rows):
            scores[i] = vals @ model.emissions[rows]
    return scores


def _logsumexp(x: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    return (m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))).squeeze(axis)


def sequence_score(
    model: CrfModel, features: Sequence[FeatureVector], labels: Sequence[str]
) -> float:
    """Unnormalized log score of one labeling of one sequence."""
    if len(features) != len(labels):
        raise ValueError(f"{len(features)} feature vectors but {len(labels)} labels")
    if not features:
        raise ValueError("sequence must be non-empty")
    idx = [model.label_index(l) for l in labels]
    total = 0.0
    for fv, y in zip(features, idx):
        for key, value in fv.items():
            row = model.feature_index.get(key)
            if row is not None:
                total += value * model.emissions[row, y]
    for prev, cur in zip(idx, idx[1:]):
        total += model.transitions[prev, cur]
    return float(total)


def log_partition(model: CrfModel, features: Sequence[FeatureVector]) -> float:
    """Log of the sum of exp-scores over all labelings (log-space forward)."""
    if not features:
        raise ValueError("sequence must be non-empty")
    scores = _emission_matrix(model, _encode(model, features))
    alpha = scores[0]
    for i in range(1, len(scores)):
        alpha = _logsumexp(alpha[:, None] + model.transitions, axis=0) + scores[i]
    return float(_logsumexp(alpha))


def viterbi(
    model: CrfModel, features: Sequence[FeatureVector]
) -> tuple[list[str], float]:
    """Highest-scoring labeling and its score; ties go to the lowest label index."""
    if not features:
        raise ValueError("sequence must be non-empty")
    scores = _emission_matrix(model, _encode(model, features))
    n = len(scores)
    best = scores[0]
    backptr = np.zeros((n, len(model.labels)), dtype=np.intp)
    for i in range(1, n):
        cand = best[:, None] + model.transitions
        backptr[i] = np.argmax(cand, axis=0)
        best = cand[backptr[i], np.arange(len(model.labels))] + scores[i]
    path = [int(np.argmax(best))]
    for i in range(n - 1, 0, -1):
        path.append(int(backptr[i, path[-1]]))
    path.reverse()
    return [model.labels[y] for y in path], float(np.max(best))


def _forward_backward(
    transitions: np.ndarray, scores: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Log-partition, unary marginals (n, L) and pairwise marginals (n-1, L, L)."""
    n, n_labels = scores.shape
    alpha = np.zeros_like(scores)
    alpha[0] = scores[0]
    for i in range(1, n):
        alpha[i] = _logsumexp(alpha[i - 1][:, None] + transitions, axis=0) + scores[i]
    log_z = float(_logsumexp(alpha[-1]))

    beta = np.zeros_like(scores)
    for i in range(n - 2, -1, -1):
        beta[i] = _logsumexp(transitions + (scores[i + 1] + beta[i + 1])[None, :], axis=1)

    unary = np.exp(alpha + beta - log_z)
    pairwise = np.empty((n - 1, n_labels, n_labels))
    for i in range(1, n):
        pairwise[i - 1] = np.exp(
            alpha[i - 1][:, None] + transitions + (scores[i] + beta[i])[None, :] - log_z
        )
    return log_z, unary, pairwise


def _accumulate_sequence(
    model: CrfModel, enc: _Encoded, grad_e: np.ndarray, grad_t: np.ndarray
) -> float:
    """Add one sequence's expected-minus-empirical counts; return its NLL."""
    scores = _emission_matrix(model, enc)
    log_z, unary, pairwise = _forward_backward(model.transitions, scores)
    gold = enc.gold
    assert gold is not None

    gold_score = scores[np.arange(len(scores)), gold].sum()
    gold_score += model.transitions[gold[:-1], gold[1:]].sum()

    for i, (rows, vals) in enumerate(zip(enc.rows, enc.vals)):
        if len(rows):
            grad_e[rows] += np.outer(vals, unary[i])
            grad_e[rows, gold[i]] -= vals
    grad_t += pairwise.sum(axis=0)
    np.add.at(grad_t, (gold[:-1], gold[1:]), -1.0)
    return log_z - float(gold_score)


def nll_and_gradient(
    model: CrfModel,
    batch: Sequence[tuple[Sequence[FeatureVector], Sequence[str]]],
    l2: float = 0.0,
) -> tuple[float, CrfGradient]:
    """Regularized negative log-likelihood of a batch and its exact gradient.

    Only weights present in the model are differentiated; feature keys
    outside its vocabulary contribute nothing to either score or gradient.
    """
    grad_e = np.zeros_like(model.emissions)
    grad_t = np.zeros_like(model.transitions)
    loss = 0.0
    for features, labels in batch:
        if len(features) != len(labels):
            raise ValueError(f"{len(features)} feature vectors but {len(labels)} labels")
        if not features:
            raise ValueError("sequence must be non-empty")
        loss += _accumulate_sequence(model, _encode(model, features, labels), grad_e, grad_t)
    if l2:
        loss += 0.5 * l2 * (float(np.sum(model.emissions**2)) + float(np.sum(model.transitions**2)))
        grad_e += l2 * model.emissions
        grad_t += l2 * model.transitions
    return loss, CrfGradient(grad_e, grad_t)


def train(
    data: Sequence[tuple[Sequence[FeatureVector], Sequence[str]]],
    config: TrainConfig = TrainConfig(),
    labels: Optional[Sequence[str]] = None,
    on_epoch: Optional[Callable[[int, float], None]] = None,
) -> CrfModel:
    """Fit a CRF by mini-batch SGD with learning rate lr/(1+epoch).

    Label order and feature vocabulary default to first-seen order over the
    data, so identical data and config reproduce identical weights. The L2
    strength is scaled by the batch fraction, giving one full regularization
    pass per epoch.
    """
    if not data:
        raise ValueError("training data must be non-empty")
    if labels is None:
        seen: dict[str, None] = {}
        for _, seq_labels in data:
            for label in seq_labels:
                seen.setdefault(label)
        labels = tuple(seen)
    vocab: dict[str, None] = {}
    for features, _ in data:
        for fv in features:
            for key in fv:
                vocab.setdefault(key)
    model = CrfModel.zeros(labels, tuple(vocab))

    encoded = [_encode(model, features, seq_labels) for features, seq_labels in data]
    grad_e = np.zeros_like(model.emissions)
    grad_t = np.zeros_like(model.transitions)
    rng = np.random.default_rng(config.seed)
    n = len(encoded)

    for epoch in range(config.epochs):
        lr = config.learning_rate / (1.0 + epoch)
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            chunk = order[start : start + config.batch_size]
            grad_e.fill(0.0)
            grad_t.fill(0.0)
            loss = 0.0
            for k in chunk:
                loss += _accumulate_sequence(model, encoded[k], grad_e, grad_t)
            l2 = config.l2 * len(chunk) / n
            if l2:
                loss += 0.5 * l2 * (
                    float(np.sum(model.emissions**2)) + float(np.sum(model.transitions**2))
                )
                grad_e += l2 * model.emissions
                grad_t += l2 * model.transitions
            model.emissions -= lr * grad_e
            model.transitions -= lr * grad_t
            epoch_loss += loss
        logger.debug("epoch %d: loss %.6f", epoch, epoch_loss)
        if on_epoch is not None:
            on_epoch(epoch, epoch_loss)
    return model


def _format_weight(w: float) -> str:
    return f"{w:.17g}"


def save_model(model: CrfModel, path: str | Path) -> None:
    """Write a model as versioned UTF-8 text; save -> load -> save is stable."""
    for label in model.labels:
        if "," in label or "\t" in label or "\n" in label:
            raise ValueError(f"label not serializable: {label!r}")
    lines = [MODEL_FORMAT_HEADER, ",".join(model.labels)]
    for i, src in enumerate(model.labels):
        for j, dst in enumerate(model.labels):
            lines.append(f"T\t{src}\t{dst}\t{_format_weight(model.transitions[i, j])}")
    for key in sorted(model.feature_index):
        if "\t" in key or "\n" in key:
            raise ValueError(f"feature key not serializable: {key!r}")
        row = model.feature_index[key]
        for j, label in enumerate(model.labels):
            lines.append(f"E\t{key}\t{label}\t{_format_weight(model.emissions[row, j])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> CrfModel:
    """Read a model written by `save_model`; weights round-trip bit-exactly."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MODEL_FORMAT_HEADER:
        found = lines[0] if lines else "<empty file>"
        raise ModelFormatError(f"line 1: expected header {MODEL_FORMAT_HEADER!r}, found {found!r}")
    if len(lines) < 2:
        raise ModelFormatError("line 2: missing label set line")
    labels = tuple(lines[1].split(",")) if lines[1] else ()
    label_index = {label: i for i, label in enumerate(labels)}

    transitions = np.zeros((len(labels), len(labels)))
    emission_rows: dict[str, np.ndarray] = {}
    transition_count = 0
    emission_counts: dict[str, int] = {}
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split("\t")
        kind = parts[0] if parts else ""
        try:
            if kind == "T" and len(parts) == 4:
                transitions[label_index[parts[1]], label_index[parts[2]]] = float(parts[3])
                transition_count += 1
            elif kind == "E" and len(parts) == 4:
                row = emission_rows.setdefault(parts[1], np.zeros(len(labels)))
                row[label_index[parts[2]]] = float(parts[3])
                emission_counts[parts[1]] = emission_counts.get(parts[1], 0) + 1
            else:
                raise ValueError
        except (KeyError, ValueError):
            raise ModelFormatError(f"line {lineno}: bad record {line!r}") from None

    # A writer emits every (from, to) pair and every label of each key, so
    # anything less means the file was cut short.
    if transition_count != len(labels) ** 2:
        raise ModelFormatError(
            f"line {len(lines)}: expected {len(labels) ** 2} transition records, "
            f"found {transition_count} (truncated file?)"
        )
    for key, count in emission_counts.items():
        if count != len(labels):
            raise ModelFormatError(
                f"line {len(lines)}: feature {key!r} has {count} of "
                f"{len(labels)} label weights (truncated file?)"
            )

    index = {key: i for i, key in enumerate(emission_rows)}
    emissions = (
        np.stack(list(emission_rows.values()))
        if emission_rows
        else np.zeros((0, len(labels)))
    )
    return CrfModel(labels, index, emissions, transitions)
