import pytest

from mica.corpus import Sentence, Token
from mica.features import extract_features, sentence_features


def sentence(*surfaces):
    return Sentence(tuple(Token(s) for s in surfaces))


class TestSingleToken:
    def test_jean(self):
        feats = extract_features(sentence("Jean"), 0)
        assert feats == {
            "bias": 1.0,
            "w.lower=jean": 1.0,
            "w.istitle": 1.0,
            "suffix3=ean": 1.0,
            "suffix2=an": 1.0,
            "BOS": 1.0,
            "EOS": 1.0,
        }

    def test_all_caps(self):
        feats = extract_features(sentence("PARIS"), 0)
        assert "w.isupper" in feats
        assert "w.istitle" not in feats

    def test_digits(self):
        feats = extract_features(sentence("1990"), 0)
        assert "w.isdigit" in feats
        assert feats["suffix3=990"] == 1.0

    def test_short_token_uses_whole_surface_as_suffix(self):
        feats = extract_features(sentence("ab"), 0)
        assert "suffix3=ab" in feats
        assert "suffix2=ab" in feats

    def test_diacritics_title_case(self):
        assert "w.istitle" in extract_features(sentence("Éric"), 0)
        assert "w.istitle" not in extract_features(sentence("éric"), 0)


class TestNeighbors:
    def test_middle_position_has_both_neighbors(self):
        feats = extract_features(sentence("Jean", "Dupont", "PARIS"), 1)
        assert "-1:bias" in feats
        assert feats["-1:w.lower=jean"] == 1.0
        assert "-1:w.istitle" in feats
        assert "+1:bias" in feats
        assert feats["+1:w.lower=paris"] == 1.0
        assert "+1:w.isupper" in feats
        assert "BOS" not in feats and "EOS" not in feats

    def test_neighbor_suffixes_not_emitted(self):
        feats = extract_features(sentence("Jean", "Dupont"), 1)
        assert not any(k.startswith("-1:suffix") for k in feats)

    def test_boundary_flags(self):
        s = sentence("a", "b", "c")
        assert "BOS" in extract_features(s, 0)
        assert "EOS" in extract_features(s, 2)
        assert "EOS" not in extract_features(s, 0)

    def test_position_out_of_range(self):
        with pytest.raises(IndexError):
            extract_features(sentence("a"), 1)
        with pytest.raises(IndexError):
            extract_features(sentence("a"), -1)


class TestContracts:
    def test_locality_distant_token_is_invisible(self):
        near = sentence("a", "b", "c", "d", "e")
        far = sentence("a", "b", "c", "d", "CHANGED")
        assert extract_features(near, 1) == extract_features(far, 1)
        assert extract_features(near, 2) == extract_features(far, 2)
        assert extract_features(near, 3) != extract_features(far, 3)

    def test_deterministic(self):
        s = sentence("Jean", "Dupont")
        assert extract_features(s, 0) == extract_features(s, 0)

    def test_all_values_are_one(self):
        for fv in sentence_features(sentence("Jean", "1990", "PARIS", "était")):
            assert set(fv.values()) == {1.0}

    def test_sentence_features_covers_all_positions(self):
        s = sentence("a", "b", "c")
        assert len(sentence_features(s)) == 3
