"""Scikit-learn-style estimators wrapping the CRF and the two-pass pipeline.

`CrfTagger` follows the sklearn-crfsuite convention: X is a list of
sequences of sparse feature dicts, y a parallel list of label sequences.
`MicaTagger` works one level up, on documents, because the second pass needs
sentence neighborhoods and token surfaces. Both expose `get_params` /
`set_params` and so compose with model selection utilities.
"""

from __future__ import annotations

from typing import Optional, Sequence, Union

from sklearn.base import BaseEstimator

from . import crf, pipeline
from .context import ContextConfig
from .corpus import LABELS, Corpus, Document
from .crf import TrainConfig
from .features import FeatureVector


def _check_parallel(X: Sequence, y: Sequence, what: str) -> None:
    if len(X) != len(y):
        raise ValueError(f"X and y disagree: {len(X)} vs {len(y)} {what}")
    for i, (xs, ys) in enumerate(zip(X, y)):
        if len(xs) != len(ys):
            raise ValueError(f"{what[:-1]} {i}: {len(xs)} items in X but {len(ys)} labels")


def _as_documents(X: Union[Corpus, Sequence[Document]]) -> tuple[Document, ...]:
    if isinstance(X, Corpus):
        return X.documents
    documents = tuple(X)
    if not all(isinstance(d, Document) for d in documents):
        raise TypeError("X must be a Corpus or a sequence of Document")
    return documents


class CrfTagger(BaseEstimator):
    """Linear-chain CRF sequence tagger over sparse feature dicts.

    Parameters mirror `TrainConfig`; `fit` stores the trained weights as
    `model_`.
    """

    def __init__(
        self,
        epochs: int = 30,
        learning_rate: float = 0.1,
        l2: float = 1e-4,
        batch_size: int = 8,
        seed: int = 0,
        shuffle: bool = True,
    ) -> None:
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.batch_size = batch_size
        self.seed = seed
        self.shuffle = shuffle

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            l2=self.l2,
            batch_size=self.batch_size,
            seed=self.seed,
            shuffle=self.shuffle,
        )

    def fit(
        self,
        X: Sequence[Sequence[FeatureVector]],
        y: Sequence[Sequence[str]],
    ) -> "CrfTagger":
        _check_parallel(X, y, "sequences")
        self.model_ = crf.train(list(zip(X, y)), self._train_config())
        return self

    def predict(self, X: Sequence[Sequence[FeatureVector]]) -> list[list[str]]:
        self._check_fitted()
        return [crf.viterbi(self.model_, seq)[0] for seq in X]

    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise RuntimeError("this tagger is not fitted yet; call fit first")


class MicaTagger(BaseEstimator):
    """Two-pass document tagger with contextual similarity features.

    `fit` expects gold-labeled documents (a `Corpus` or a sequence of
    `Document`); an optional `y` of per-document, per-sentence label
    sequences overrides the gold layer. After fitting, `pass1_` holds the
    plain CRF and `pass2_` the similarity-enriched one.
    """

    def __init__(
        self,
        window: int = 8,
        include_current: bool = True,
        epochs: int = 30,
        learning_rate: float = 0.1,
        l2: float = 1e-4,
        batch_size: int = 8,
        seed: int = 0,
        shuffle: bool = True,
    ) -> None:
        self.window = window
        self.include_current = include_current
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.batch_size = batch_size
        self.seed = seed
        self.shuffle = shuffle

    def _context_config(self) -> ContextConfig:
        return ContextConfig(window=self.window, include_current=self.include_current)

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            l2=self.l2,
            batch_size=self.batch_size,
            seed=self.seed,
            shuffle=self.shuffle,
        )

    def fit(
        self,
        X: Union[Corpus, Sequence[Document]],
        y: Optional[Sequence[Sequence[Sequence[str]]]] = None,
    ) -> "MicaTagger":
        documents = _as_documents(X)
        if y is not None:
            _check_parallel(documents, y, "documents")
            documents = tuple(
                Document(
                    tuple(
                        s.with_gold(labels)
                        for s, labels in zip(doc.sentences, doc_labels)
                    ),
                    doc.doc_id,
                )
                for doc, doc_labels in zip(documents, y)
            )
        corpus = Corpus(documents)
        self.pass1_, self.pass2_ = pipeline.two_pass_train(
            corpus, self._context_config(), self._train_config()
        )
        return self

    def predict(self, X: Union[Corpus, Sequence[Document]]) -> list[list[list[str]]]:
        self._check_fitted()
        config = self._context_config()
        return [
            pipeline.two_pass_predict(doc, self.pass1_, self.pass2_, config)
            for doc in _as_documents(X)
        ]

    def predict_baseline(self, X: Union[Corpus, Sequence[Document]]) -> list[list[list[str]]]:
        """First-pass-only predictions, for side-by-side comparisons."""
        self._check_fitted()
        return [pipeline.predict_document(self.pass1_, doc) for doc in _as_documents(X)]

    def _check_fitted(self) -> None:
        if not hasattr(self, "pass2_"):
            raise RuntimeError("this tagger is not fitted yet; call fit first")


__all__ = ["CrfTagger", "MicaTagger", "LABELS"]
