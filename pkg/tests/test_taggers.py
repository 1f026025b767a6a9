import numpy as np
import pytest
from sklearn.base import clone


from mica.synthetic import generate_corpus
from mica.taggers import CrfTagger, MicaTagger

X_TOY = [
    [{"w=jean": 1.0, "bias": 1.0}, {"w=dupont": 1.0, "bias": 1.0}],
    [{"w=paris": 1.0, "bias": 1.0}],
] * 10
Y_TOY = [["B-PER", "I-PER"], ["B-LOC"]] * 10


class TestCrfTagger:
    def test_fit_predict(self):
        tagger = CrfTagger(epochs=10, seed=0)
        assert tagger.fit(X_TOY, Y_TOY) is tagger
        assert tagger.predict(X_TOY[:2]) == Y_TOY[:2]

    def test_get_set_params_and_clone(self):
        tagger = CrfTagger(epochs=3, l2=0.5)
        params = tagger.get_params()
        assert params["epochs"] == 3 and params["l2"] == 0.5
        other = clone(tagger)
        assert other.get_params() == params
        tagger.set_params(epochs=7)
        assert tagger.epochs == 7

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ValueError, match="X and y"):
            CrfTagger().fit(X_TOY, Y_TOY[:-1])
        with pytest.raises(ValueError, match="labels"):
            CrfTagger().fit([X_TOY[0]], [["B-PER"]])

    def test_predict_before_fit(self):
        with pytest.raises(RuntimeError, match="not fitted"):
            CrfTagger().predict(X_TOY)

    def test_deterministic(self):
        a = CrfTagger(epochs=5, seed=9).fit(X_TOY, Y_TOY)
        b = CrfTagger(epochs=5, seed=9).fit(X_TOY, Y_TOY)
        assert np.array_equal(a.model_.emissions, b.model_.emissions)


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(6, seed=3)


class TestMicaTagger:

    def test_fit_predict_shapes(self, corpus):
        tagger = MicaTagger(window=2, epochs=6, seed=0)
        tagger.fit(corpus)
        predictions = tagger.predict(corpus)
        assert len(predictions) == len(corpus.documents)
        for doc, doc_labels in zip(corpus.documents, predictions):
            assert [len(s) for s in doc.sentences] == [len(l) for l in doc_labels]

    def test_accepts_document_sequence_and_explicit_y(self, corpus):
        documents = list(corpus.documents)
        y = [[list(s.gold_labels) for s in d.sentences] for d in documents]
        tagger = MicaTagger(window=1, epochs=4, seed=0).fit(documents, y)
        assert hasattr(tagger, "pass1_") and hasattr(tagger, "pass2_")

    def test_baseline_predictions_available(self, corpus):
        tagger = MicaTagger(window=1, epochs=4, seed=0).fit(corpus)
        baseline = tagger.predict_baseline(corpus)
        assert len(baseline) == len(corpus.documents)

    def test_params_roundtrip(self):
        tagger = MicaTagger(window=5, include_current=False)
        params = tagger.get_params()
        assert params["window"] == 5 and params["include_current"] is False
        assert clone(tagger).get_params() == params

    def test_rejects_non_documents(self):
        with pytest.raises(TypeError, match="Corpus"):
            MicaTagger().fit(["not a document"])

    def test_predict_before_fit(self, corpus):
        with pytest.raises(RuntimeError, match="not fitted"):
            MicaTagger().predict(corpus)
