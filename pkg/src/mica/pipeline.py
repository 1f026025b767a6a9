"""Two-pass tagging pipeline.

Pass 1 is a plain CRF over handcrafted features. Its predictions, never the
gold labels, seed per-sentence candidate dictionaries; similarity features
against those candidates are appended to every token's features and a second
CRF is trained or decoded on the enriched input. Building dictionaries from
predictions at training time keeps pass-2 training conditions identical to
inference, at the documented cost that pass-1 false positives propagate into
the candidate lists.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from . import crf
from .context import ContextConfig, build_dictionary, enrich, similarity_vector
from .corpus import LABELS, Corpus, Document
from .crf import CrfModel, TrainConfig
from .features import FeatureVector, sentence_features

#: Per-document predictions: one label sequence per sentence.
DocumentLabels = list[list[str]]


def predict_document(model: CrfModel, document: Document) -> DocumentLabels:
    """Single-pass Viterbi decode of every sentence of a document."""
    return [crf.viterbi(model, sentence_features(s))[0] for s in document.sentences]


def predict_corpus(model: CrfModel, corpus: Corpus) -> list[DocumentLabels]:
    return [predict_document(model, doc) for doc in corpus.documents]


def _gold_training_data(
    corpus: Corpus,
) -> list[tuple[list[FeatureVector], tuple[str, ...]]]:
    data = []
    for doc in corpus.documents:
        for sentence in doc.sentences:
            gold = sentence.gold_labels
            if gold is None:
                raise ValueError(
                    f"document {doc.doc_id!r}, sentence {sentence.index_in_document}: "
                    "gold labels required for training"
                )
            data.append((sentence_features(sentence), gold))
    return data


def enriched_document_features(
    document: Document,
    predictions: Sequence[Sequence[str]],
    config: ContextConfig,
) -> list[list[FeatureVector]]:
    """Handcrafted plus similarity features for every sentence of a document,
    with candidate dictionaries drawn from `predictions`."""
    enriched = []
    for i, sentence in enumerate(document.sentences):
        dictionary = build_dictionary(document, i, predictions, config)
        enriched.append(
            [
                enrich(fv, similarity_vector(token.surface, dictionary))
                for token, fv in zip(sentence.tokens, sentence_features(sentence))
            ]
        )
    return enriched


def train_first_pass(
    train: Corpus,
    crf_config: TrainConfig = TrainConfig(),
    on_epoch: Optional[Callable[[int, float], None]] = None,
) -> CrfModel:
    """Train the plain CRF on handcrafted features only."""
    return crf.train(_gold_training_data(train), crf_config, labels=LABELS, on_epoch=on_epoch)


def train_second_pass(
    train: Corpus,
    predictions: Sequence[Sequence[Sequence[str]]],
    config: ContextConfig = ContextConfig(),
    crf_config: TrainConfig = TrainConfig(),
    on_epoch: Optional[Callable[[int, float], None]] = None,
) -> CrfModel:
    """Train the enriched CRF against fixed (usually cached) first-pass
    predictions of the training corpus."""
    data = []
    for doc, doc_predictions in zip(train.documents, predictions):
        features = enriched_document_features(doc, doc_predictions, config)
        for sentence, sentence_fvs in zip(doc.sentences, features):
            gold = sentence.gold_labels
            if gold is None:
                raise ValueError(
                    f"document {doc.doc_id!r}, sentence {sentence.index_in_document}: "
                    "gold labels required for training"
                )
            data.append((sentence_fvs, gold))
    return crf.train(data, crf_config, labels=LABELS, on_epoch=on_epoch)


def two_pass_train(
    train: Corpus,
    config: ContextConfig = ContextConfig(),
    crf_config: TrainConfig = TrainConfig(),
) -> tuple[CrfModel, CrfModel]:
    """Train the first-pass CRF, re-tag the training corpus with it, and
    train the second-pass CRF on similarity-enriched features."""
    pass1 = train_first_pass(train, crf_config)
    predictions = predict_corpus(pass1, train)
    pass2 = train_second_pass(train, predictions, config, crf_config)
    return pass1, pass2


def two_pass_predict(
    document: Document,
    pass1: CrfModel,
    pass2: CrfModel,
    config: ContextConfig = ContextConfig(),
    pass1_predictions: Optional[Sequence[Sequence[str]]] = None,
) -> DocumentLabels:
    """Decode a document with both passes; the second pass's output is final.

    `pass1_predictions`, when given (for example reloaded from a cached
    CoNLL file), replaces the first decoding pass.
    """
    if pass1_predictions is None:
        pass1_predictions = predict_document(pass1, document)
    features = enriched_document_features(document, pass1_predictions, config)
    return [crf.viterbi(pass2, sentence_fvs)[0] for sentence_fvs in features]


def two_pass_predict_corpus(
    corpus: Corpus,
    pass1: CrfModel,
    pass2: CrfModel,
    config: ContextConfig = ContextConfig(),
    pass1_predictions: Optional[Sequence[Sequence[Sequence[str]]]] = None,
) -> list[DocumentLabels]:
    if pass1_predictions is None:
        pass1_predictions = predict_corpus(pass1, corpus)
    return [
        two_pass_predict(doc, pass1, pass2, config, doc_predictions)
        for doc, doc_predictions in zip(corpus.documents, pass1_predictions)
    ]
