import itertools
import math

import numpy as np
import pytest

from mica.crf import (
    CrfModel,
    ModelFormatError,
    TrainConfig,
    load_model,
    log_partition,
    nll_and_gradient,
    save_model,
    sequence_score,
    train,
    viterbi,
)
from tests.conftest import make_random_model, random_features


def enumerate_labelings(model, features):
    for labels in itertools.product(model.labels, repeat=len(features)):
        yield list(labels), sequence_score(model, features, labels)


def naive_score(model, features, labels):
    """Direct re-summation over (key, label) pairs and transitions."""
    total = 0.0
    for fv, label in zip(features, labels):
        for key, value in fv.items():
            total += value * model.emission_weight(key, label)
    for prev, cur in zip(labels, labels[1:]):
        total += model.transitions[model.label_index(prev), model.label_index(cur)]
    return total


class TestSequenceScore:
    def test_zero_weights_score_zero(self):
        model = CrfModel.zeros(("A", "B"), ("f",))
        assert sequence_score(model, [{"f": 1.0}] * 3, ["A", "B", "A"]) == 0.0

    def test_single_position_has_no_transition(self):
        model = CrfModel.zeros(("A", "B"), ("f",))
        model.transitions[:] = 100.0
        model.emissions[0, 0] = 2.5
        assert sequence_score(model, [{"f": 2.0}], ["A"]) == pytest.approx(5.0)

    def test_matches_naive_resummation(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            model = make_random_model(rng, 3, 5)
            feats = random_features(rng, 4, list(model.feature_index))
            labels = [model.labels[i] for i in rng.integers(0, 3, size=4)]
            assert sequence_score(model, feats, labels) == pytest.approx(
                naive_score(model, feats, labels)
            )

    def test_unseen_keys_contribute_zero(self):
        model = CrfModel.zeros(("A",), ("f",))
        model.emissions[0, 0] = 3.0
        assert sequence_score(model, [{"g": 5.0}], ["A"]) == 0.0

    def test_length_mismatch(self):
        model = CrfModel.zeros(("A",), ("f",))
        with pytest.raises(ValueError, match="labels"):
            sequence_score(model, [{"f": 1.0}], ["A", "A"])

    def test_unknown_label(self):
        model = CrfModel.zeros(("A",), ("f",))
        with pytest.raises(ValueError, match="label"):
            sequence_score(model, [{"f": 1.0}], ["Z"])


class TestLogPartition:
    def test_zero_weights_uniform(self):
        model = CrfModel.zeros(("A", "B", "C"), ("f",))
        feats = [{"f": 1.0}] * 4
        assert log_partition(model, feats) == pytest.approx(4 * math.log(3))

    def test_single_position_logsumexp(self):
        model = CrfModel.zeros(("A", "B"), ("f",))
        model.emissions[0] = [1.0, -2.0]
        expected = math.log(math.exp(1.0) + math.exp(-2.0))
        assert log_partition(model, [{"f": 1.0}]) == pytest.approx(expected)

    def test_matches_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            model = make_random_model(rng, int(rng.integers(2, 5)), 4)
            feats = random_features(rng, int(rng.integers(1, 6)), list(model.feature_index))
            brute = math.log(
                sum(math.exp(s) for _, s in enumerate_labelings(model, feats))
            )
            assert log_partition(model, feats) == pytest.approx(brute, abs=1e-8)

    def test_empty_sequence_rejected(self):
        model = CrfModel.zeros(("A",), ("f",))
        with pytest.raises(ValueError):
            log_partition(model, [])

    def test_normalized_probabilities_sum_to_one(self):
        rng = np.random.default_rng(13)
        model = make_random_model(rng, 4, 4)
        feats = random_features(rng, 5, list(model.feature_index))
        log_z = log_partition(model, feats)
        total = sum(math.exp(s - log_z) for _, s in enumerate_labelings(model, feats))
        assert total == pytest.approx(1.0, abs=1e-8)


class TestViterbi:
    def test_all_zero_ties_take_first_label(self):
        model = CrfModel.zeros(("A", "B"), ("f",))
        labels, score = viterbi(model, [{"f": 1.0}] * 3)
        assert labels == ["A", "A", "A"]
        assert score == 0.0

    def test_strong_bias_label_wins_everywhere(self):
        model = CrfModel.zeros(("O", "X"), ("bias",))
        model.emissions[0, 0] = 50.0
        labels, _ = viterbi(model, [{"bias": 1.0}] * 4)
        assert labels == ["O", "O", "O", "O"]

    def test_matches_enumeration(self):
        rng = np.random.default_rng(17)
        for _ in range(15):
            model = make_random_model(rng, int(rng.integers(2, 5)), 4)
            feats = random_features(rng, int(rng.integers(1, 6)), list(model.feature_index))
            best_labels, best_score = max(
                enumerate_labelings(model, feats), key=lambda pair: pair[1]
            )
            got_labels, got_score = viterbi(model, feats)
            assert got_score == pytest.approx(best_score)
            assert got_labels == best_labels

    def test_beats_random_labelings(self):
        rng = np.random.default_rng(19)
        model = make_random_model(rng, 4, 6)
        feats = random_features(rng, 8, list(model.feature_index))
        _, best = viterbi(model, feats)
        for _ in range(1000):
            labels = [model.labels[i] for i in rng.integers(0, 4, size=8)]
            assert sequence_score(model, feats, labels) <= best + 1e-9

    def test_emission_shift_leaves_argmax_unchanged(self):
        rng = np.random.default_rng(23)
        model = make_random_model(rng, 3, 5)
        feats = random_features(rng, 6, list(model.feature_index))
        before, _ = viterbi(model, feats)
        model.emissions[2] += 7.5
        after, _ = viterbi(model, feats)
        assert before == after


def numerical_gradient(model, batch, l2, step=1e-5):
    grad_e = np.zeros_like(model.emissions)
    grad_t = np.zeros_like(model.transitions)
    for arr, grad in ((model.emissions, grad_e), (model.transitions, grad_t)):
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            arr[idx] += step
            up, _ = nll_and_gradient(model, batch, l2)
            arr[idx] -= 2 * step
            down, _ = nll_and_gradient(model, batch, l2)
            arr[idx] += step
            grad[idx] = (up - down) / (2 * step)
    return grad_e, grad_t


def assert_gradients_close(analytic, numeric, rtol=1e-4, atol=1e-8):
    diff = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    assert np.all((diff <= rtol * scale) | (diff <= atol)), (
        f"max rel err {np.max(diff / np.maximum(scale, 1e-300))}"
    )


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(29)
        for _ in range(3):
            model = make_random_model(rng, 3, 4, scale=1.0)
            batch = []
            for _ in range(2):
                feats = random_features(rng, int(rng.integers(1, 5)), list(model.feature_index))
                labels = [model.labels[i] for i in rng.integers(0, 3, size=len(feats))]
                batch.append((feats, labels))
            _, grad = nll_and_gradient(model, batch, l2=0.01)
            num_e, num_t = numerical_gradient(model, batch, l2=0.01)
            assert_gradients_close(grad.emissions, num_e)
            assert_gradients_close(grad.transitions, num_t)

    def test_uniform_model_transition_gradient_closed_form(self):
        model = CrfModel.zeros(("A", "B", "C"), ("f",))
        labels = ["A", "B", "B", "C"]
        _, grad = nll_and_gradient(model, [([{"f": 1.0}] * 4, labels)], l2=0.0)
        expected = np.full((3, 3), 3 / 9.0)
        expected[0, 1] -= 1
        expected[1, 1] -= 1
        expected[1, 2] -= 1
        assert np.allclose(grad.transitions, expected, atol=1e-12)

    def test_near_deterministic_model_has_vanishing_data_gradient(self):
        model = CrfModel.zeros(("A", "B"), ("fa", "fb"))
        model.emissions[0] = [60.0, -60.0]
        model.emissions[1] = [-60.0, 60.0]
        batch = [([{"fa": 1.0}, {"fb": 1.0}], ["A", "B"])]
        loss, grad = nll_and_gradient(model, batch, l2=0.0)
        assert loss == pytest.approx(0.0, abs=1e-8)
        assert np.allclose(grad.emissions, 0.0, atol=1e-8)
        assert np.allclose(grad.transitions, 0.0, atol=1e-8)
        l2 = 1e-3
        loss_l2, _ = nll_and_gradient(model, batch, l2=l2)
        assert loss_l2 == pytest.approx(0.5 * l2 * float(np.sum(model.emissions**2)), rel=1e-9)

    def test_loss_is_nll_of_gold(self):
        rng = np.random.default_rng(31)
        model = make_random_model(rng, 3, 4)
        feats = random_features(rng, 3, list(model.feature_index))
        labels = ["L0", "L2", "L1"]
        loss, _ = nll_and_gradient(model, [(feats, labels)], l2=0.0)
        expected = log_partition(model, feats) - sequence_score(model, feats, labels)
        assert loss == pytest.approx(expected)


class TestTrain:
    @staticmethod
    def toy_data(copies=50):
        feats = [{"w=jean": 1.0, "bias": 1.0}, {"w=dupont": 1.0, "bias": 1.0}]
        return [(feats, ["B-PER", "I-PER"])] * copies

    def test_fits_separable_pattern(self):
        model = train(self.toy_data(), TrainConfig(epochs=10, seed=0))
        labels, _ = viterbi(model, self.toy_data()[0][0])
        assert labels == ["B-PER", "I-PER"]

    def test_deterministic_under_seed(self):
        a = train(self.toy_data(), TrainConfig(epochs=5, seed=3))
        b = train(self.toy_data(), TrainConfig(epochs=5, seed=3))
        assert np.array_equal(a.emissions, b.emissions)
        assert np.array_equal(a.transitions, b.transitions)
        assert a.labels == b.labels and a.feature_index == b.feature_index

    def test_zero_epochs_returns_zero_model(self):
        model = train(self.toy_data(), TrainConfig(epochs=0))
        assert not model.emissions.any()
        assert not model.transitions.any()
        assert model.feature_vocabulary == {"w=jean", "w=dupont", "bias"}

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            train([], TrainConfig())

    def test_loss_decreases_on_separable_data(self):
        losses = []
        train(
            self.toy_data(),
            TrainConfig(epochs=8, seed=0),
            on_epoch=lambda e, loss: losses.append(loss),
        )
        assert len(losses) == 8
        assert losses[-1] < losses[0]

    def test_l2_keeps_weights_bounded(self):
        short = train(self.toy_data(), TrainConfig(epochs=10, l2=0.05, seed=0))
        long = train(self.toy_data(), TrainConfig(epochs=80, l2=0.05, seed=0))
        for model in (short, long):
            assert np.isfinite(model.emissions).all()
        assert np.linalg.norm(long.emissions) < 2 * np.linalg.norm(short.emissions) + 10

    def test_explicit_label_order_is_used(self):
        model = train(self.toy_data(), TrainConfig(epochs=0), labels=("O", "B-PER", "I-PER"))
        assert model.labels == ("O", "B-PER", "I-PER")

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=-1)
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(l2=-0.1)
        with pytest.raises(ValueError):
            TrainConfig(batch_size=0)


class TestPersistence:
    @staticmethod
    def small_model():
        rng = np.random.default_rng(37)
        model = make_random_model(rng, 3, 4)
        model.labels = ("O", "B-PER", "I-PER")
        return CrfModel(
            ("O", "B-PER", "I-PER"),
            {"bias": 0, "w.lower=jean": 1, "suffix2=an": 2, "sim:PER": 3},
            model.emissions,
            model.transitions,
        )

    def test_roundtrip_is_bit_exact(self, tmp_path):
        model = self.small_model()
        path = tmp_path / "m.crf"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.labels == model.labels
        assert loaded.feature_vocabulary == model.feature_vocabulary
        for key in model.feature_index:
            for label in model.labels:
                assert loaded.emission_weight(key, label) == model.emission_weight(key, label)
        assert np.array_equal(loaded.transitions, model.transitions)

    def test_save_load_save_is_byte_identical(self, tmp_path):
        model = self.small_model()
        first, second = tmp_path / "a.crf", tmp_path / "b.crf"
        save_model(model, first)
        save_model(load_model(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "m.crf"
        save_model(self.small_model(), path)
        lines = path.read_text().splitlines()
        for cut in (1, 5, len(lines) - 1):
            (tmp_path / "cut.crf").write_text("\n".join(lines[:cut]) + "\n")
            with pytest.raises(ModelFormatError):
                load_model(tmp_path / "cut.crf")

    def test_unknown_version_rejected(self, tmp_path):
        path = tmp_path / "m.crf"
        save_model(self.small_model(), path)
        text = path.read_text().replace("mica-crf v1", "mica-crf v2", 1)
        path.write_text(text)
        with pytest.raises(ModelFormatError, match="line 1"):
            load_model(path)

    def test_corrupt_record_names_line(self, tmp_path):
        path = tmp_path / "m.crf"
        save_model(self.small_model(), path)
        lines = path.read_text().splitlines()
        lines[4] = "T\tO\tB-PER\tnot_a_number"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ModelFormatError, match="line 5"):
            load_model(path)

    def test_empty_model_roundtrips(self, tmp_path):
        model = CrfModel.zeros(("O",), ())
        path = tmp_path / "m.crf"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.labels == ("O",)
        assert loaded.feature_vocabulary == frozenset()
        assert loaded.emissions.shape == (0, 1)
