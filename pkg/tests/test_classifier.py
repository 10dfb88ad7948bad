"""Classifier: features, training math, metrics, serialization, autotune.

The gradient test checks the analytic update against central finite
differences on an independently written loss function; the feature test
re-derives the expected hashes from the published FNV-1a constants.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexalect import classifier as clf
from hexalect.classifier import (
    Example,
    ModelConfig,
    autotune,
    evaluate,
    featurize,
    load_model,
    predict,
    serialize_model,
    serialized_size,
    split_train_test,
    top_prediction,
    train,
    zero_model,
)
from hexalect.errors import (
    EmptyTestSet,
    EmptyTrainingSet,
    NoFeasibleModel,
    SingleClassCorpus,
)
from hexalect.store import CorpusStore


def fnv64(s: str) -> int:
    """Reference FNV-1a, written from the published constants."""
    h = 14695981039346656037
    for b in s.encode("utf-8"):
        h = ((h ^ b) * 1099511628211) % (1 << 64)
    return h


def make_view(texts_by_label, family_id="fam"):
    """In-memory corpus where group i holds the i-th text of every label."""
    store = CorpusStore(None)
    labels = sorted(texts_by_label)
    store.register_family({
        "family": {"family_id": family_id, "display_name": family_id,
                   "bounding_box": [0.0, 0.0, 10.0, 10.0], "hex_resolution": 0.5},
        "labels": [{"label_id": l, "name": l, "affiliation": family_id, "region": []}
                   for l in labels],
    })
    n_groups = max(len(v) for v in texts_by_label.values())
    import json as _json
    import tempfile
    lines = []
    for i in range(n_groups):
        variants = [{"text": texts_by_label[l][i], "labels": [l]}
                    for l in labels if i < len(texts_by_label[l])]
        lines.append(_json.dumps({"group_id": f"g{i:04d}", "standard": f"standard {i}",
                                  "variants": variants}))
    with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as fh:
        fh.write("\n".join(lines) + "\n")
        path = fh.name
    store.ingest_corpus(path, family_id)
    return store.snapshot(family_id)


def synthetic_texts(alphabet, n, seed, words=6, word_len=4):
    rng = np.random.default_rng(seed)
    letters = list(alphabet)
    out = []
    for _ in range(n):
        ws = ["".join(rng.choice(letters, size=word_len)) for _ in range(words)]
        out.append(" ".join(ws))
    return out


@pytest.fixture(scope="module")
def separable_view():
    return make_view({
        "aa": synthetic_texts("abcdefgh", 60, seed=1),
        "bb": synthetic_texts("qrstuvwx", 60, seed=2),
    })


@pytest.fixture(scope="module")
def separable_model(separable_view):
    split = split_train_test(separable_view, seed=3)
    return train(split.train, ModelConfig(epochs=6, seed=3)), split


class TestFeaturize:
    def test_empty_text(self):
        assert featurize("", ModelConfig()) == []

    def test_char_bigrams_of_padded_word(self):
        config = ModelConfig(char_ngram_min=2, char_ngram_max=2, word_ngram_max=0)
        got = featurize("ab", config)
        expected = [fnv64(g) % config.hash_buckets for g in ["<a", "ab", "b>"]]
        assert got == expected
        assert len(got) == 3

    def test_char_grams_never_cross_word_boundaries(self):
        config = ModelConfig(char_ngram_min=2, char_ngram_max=2, word_ngram_max=0)
        got = featurize("ab cd", config)
        expected = [fnv64(g) % config.hash_buckets
                    for g in ["<a", "ab", "b>", "<c", "cd", "d>"]]
        assert got == expected

    def test_word_ngrams_appended(self):
        config = ModelConfig(char_ngram_min=1, char_ngram_max=1, word_ngram_max=2)
        got = featurize("ab cd", config)
        tail = [fnv64(t) % config.hash_buckets for t in ["ab", "cd", "ab cd"]]
        assert got[-3:] == tail

    def test_ngram_longer_than_padded_word_yields_nothing(self):
        config = ModelConfig(char_ngram_min=5, char_ngram_max=5, word_ngram_max=0)
        assert featurize("ab", config) == []  # "<ab>" has only 4 chars

    @given(st.text(alphabet="abc äö", max_size=30))
    @settings(max_examples=50)
    def test_deterministic(self, text):
        config = ModelConfig()
        assert featurize(text, config) == featurize(text, config)

    def test_all_ids_within_buckets(self):
        config = ModelConfig(hash_buckets=4096)
        ids = featurize("es bitzeli text zum teste", config)
        assert ids and all(0 <= i < 4096 for i in ids)


class TestConfigValidation:
    def test_bad_ranges_rejected(self):
        with pytest.raises(ValueError):
            ModelConfig(char_ngram_min=3, char_ngram_max=2)
        with pytest.raises(ValueError):
            ModelConfig(char_ngram_max=7)
        with pytest.raises(ValueError):
            ModelConfig(word_ngram_max=3)
        with pytest.raises(ValueError):
            ModelConfig(hash_buckets=5000)  # not a power of two
        with pytest.raises(ValueError):
            ModelConfig(hash_buckets=2048)  # too small
        with pytest.raises(ValueError):
            ModelConfig(embedding_dim=2)
        with pytest.raises(ValueError):
            ModelConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            ModelConfig(epochs=0)

    def test_round_trip(self):
        config = ModelConfig(char_ngram_min=2, char_ngram_max=4, epochs=7, seed=99)
        assert ModelConfig.from_dict(config.to_dict()) == config


class TestSplit:
    def test_single_label_80_20(self):
        view = make_view({"aa": synthetic_texts("abcd", 10, seed=5),
                          "bb": synthetic_texts("wxyz", 10, seed=6)})
        split = split_train_test(view, ratio=0.8, seed=1)
        by_label = lambda side, l: [e for e in side if e.label == l]
        assert len(by_label(split.train, "aa")) == 8
        assert len(by_label(split.test, "aa")) == 2
        assert len(by_label(split.train, "bb")) == 8
        assert len(by_label(split.test, "bb")) == 2

    def test_same_seed_same_membership(self, separable_view):
        a = split_train_test(separable_view, seed=42)
        b = split_train_test(separable_view, seed=42)
        assert a == b

    def test_different_seeds_differ(self, separable_view):
        a = split_train_test(separable_view, seed=1)
        b = split_train_test(separable_view, seed=2)
        assert {e.variant_id for e in a.test} != {e.variant_id for e in b.test}

    def test_variants_never_straddle(self):
        store = CorpusStore(None)
        store.register_family({
            "family": {"family_id": "f", "display_name": "f",
                       "bounding_box": [0, 0, 1, 1], "hex_resolution": 0.1},
            "labels": [{"label_id": l, "name": l, "affiliation": "f", "region": []}
                       for l in ["aa", "bb"]],
        })
        import json as _json, tempfile
        lines = []
        for i in range(12):
            lines.append(_json.dumps({
                "group_id": f"g{i}", "standard": f"s {i}",
                "variants": [{"text": f"multi label text {i}", "labels": ["aa", "bb"]}],
            }))
        with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as fh:
            fh.write("\n".join(lines) + "\n")
            path = fh.name
        store.ingest_corpus(path, "f")
        split = split_train_test(store.snapshot("f"), seed=0)
        train_ids = {e.variant_id for e in split.train}
        test_ids = {e.variant_id for e in split.test}
        assert not (train_ids & test_ids)
        # each multi-label variant expands to two examples on one side
        for side in (split.train, split.test):
            for e in side:
                mates = [x for x in side if x.variant_id == e.variant_id]
                assert len(mates) == 2

    def test_tiny_label_goes_to_train_with_flag(self):
        view = make_view({"aa": synthetic_texts("abcd", 10, seed=7),
                          "bb": ["einzig text"]})
        split = split_train_test(view, seed=0)
        assert split.too_small == ("bb",)
        assert [e for e in split.train if e.label == "bb"]
        assert not [e for e in split.test if e.label == "bb"]


class TestGradient:
    def loss_fn(self, emb, proj, ids, y):
        h = emb[ids].mean(axis=0) if len(ids) else np.zeros(emb.shape[1])
        logits = h @ proj
        p = np.exp(logits - logits.max())
        p /= p.sum()
        return -math.log(p[y])

    def test_projection_gradient_matches_central_differences(self):
        rng = np.random.default_rng(11)
        dim, k = 6, 4
        emb = rng.normal(size=(64, dim))
        proj = rng.normal(size=(dim, k))
        ids = np.array([3, 9, 9, 20])
        y = 2
        h = emb[ids].mean(axis=0)
        logits = h @ proj
        p = np.exp(logits - logits.max())
        p /= p.sum()
        err = p.copy()
        err[y] -= 1.0
        analytic = np.outer(h, err)
        eps = 1e-6
        for d in range(dim):
            for j in range(k):
                plus, minus = proj.copy(), proj.copy()
                plus[d, j] += eps
                minus[d, j] -= eps
                numeric = (self.loss_fn(emb, plus, ids, y)
                           - self.loss_fn(emb, minus, ids, y)) / (2 * eps)
                denom = max(abs(numeric), abs(analytic[d, j]), 1e-8)
                assert abs(numeric - analytic[d, j]) / denom < 1e-4

    def test_embedding_gradient_matches_central_differences(self):
        rng = np.random.default_rng(12)
        dim, k = 5, 3
        emb = rng.normal(size=(32, dim))
        proj = rng.normal(size=(dim, k))
        ids = np.array([4, 4, 7])  # row 4 twice: multiplicity matters
        y = 1
        h = emb[ids].mean(axis=0)
        logits = h @ proj
        p = np.exp(logits - logits.max())
        p /= p.sum()
        grad_h = proj @ (p - np.eye(k)[y])
        eps = 1e-6
        for row, count in [(4, 2), (7, 1)]:
            analytic = count / len(ids) * grad_h
            for d in range(dim):
                plus, minus = emb.copy(), emb.copy()
                plus[row, d] += eps
                minus[row, d] -= eps
                numeric = (self.loss_fn(plus, proj, ids, y)
                           - self.loss_fn(minus, proj, ids, y)) / (2 * eps)
                denom = max(abs(numeric), abs(analytic[d]), 1e-8)
                assert abs(numeric - analytic[d]) / denom < 1e-4

    def test_sgd_steps_replay_by_hand(self):
        config = ModelConfig(char_ngram_min=1, char_ngram_max=2, word_ngram_max=1,
                             embedding_dim=4, learning_rate=0.3, epochs=1, seed=21)
        examples = [Example("v1", "abba", "x", frozenset({"x"})),
                    Example("v2", "queue", "y", frozenset({"y"}))]
        model = train(examples, config)

        # replay: same rng consumption order as the trainer
        rng = np.random.default_rng(21)
        emb = (rng.random((config.hash_buckets, 4)) * 2 - 1) / 4
        proj = np.zeros((4, 2))
        feats = [np.array(featurize(e.text, config)) for e in examples]
        targets = [0, 1]  # label_index = (x, y) sorted
        order = rng.permutation(2)
        step = 0
        for idx in order:
            ids = feats[idx]
            h = emb[ids].mean(axis=0)
            logits = h @ proj
            p = np.exp(logits - logits.max())
            p /= p.sum()
            lr = 0.3 * (1 - step / 2)
            step += 1
            err = p.copy()
            err[targets[idx]] -= 1
            grad_h = proj @ err
            np.add.at(emb, ids, -lr / len(ids) * grad_h)
            proj -= lr * np.outer(h, err)
        np.testing.assert_array_equal(model.embeddings, emb.astype("<f4"))
        np.testing.assert_array_equal(model.projection, proj.astype("<f4"))


class TestTrain:
    def test_separable_corpus_reaches_training_accuracy_one(self, separable_model):
        model, split = separable_model
        hits = sum(top_prediction(predict(model, e.text)) == e.label
                   for e in split.train)
        assert hits == len(split.train)

    def test_single_class_rejected(self):
        examples = [Example(f"v{i}", f"text {i}", "only", frozenset({"only"}))
                    for i in range(5)]
        with pytest.raises(SingleClassCorpus):
            train(examples, ModelConfig())

    def test_empty_train_set_rejected(self):
        with pytest.raises(EmptyTrainingSet):
            train([], ModelConfig())

    def test_deterministic_byte_identical_models(self, separable_view):
        split = split_train_test(separable_view, seed=9)
        config = ModelConfig(epochs=3, seed=17)
        m1 = train(split.train, config)
        m2 = train(split.train, config)
        assert serialize_model(m1) == serialize_model(m2)

    def test_loss_final_not_above_first(self, separable_model):
        model, _ = separable_model
        assert model.training_loss[-1] <= model.training_loss[0]

    def test_explicit_label_index_covers_unseen_labels(self, separable_view):
        split = split_train_test(separable_view, seed=4)
        model = train(split.train, ModelConfig(epochs=2), ["aa", "bb", "cc"])
        dist = predict(model, "hallo")
        assert set(dist) == {"aa", "bb", "cc"}


class TestPredict:
    def test_all_zero_model_is_uniform(self):
        model = zero_model(["a", "b", "c", "d"])
        dist = predict(model, "irgendwas")
        assert all(p == pytest.approx(0.25, abs=1e-12) for p in dist.values())

    def test_empty_text_on_zero_model_is_uniform(self):
        model = zero_model(["a", "b"])
        assert predict(model, "") == {"a": 0.5, "b": 0.5}

    def test_separable_argmax(self, separable_model):
        model, _ = separable_model
        assert top_prediction(predict(model, "abcd feha dgab")) == "aa"
        assert top_prediction(predict(model, "qrst uvwx wwqq")) == "bb"

    @given(st.text(alphabet="abcqrx ", max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_distribution_normalizes(self, text):
        model = zero_model(["a", "b", "c"])
        dist = predict(model, text)
        assert abs(sum(dist.values()) - 1.0) < 1e-9
        assert all(p >= 0 for p in dist.values())

    def test_permuting_label_index_permutes_probs(self, separable_model):
        model, _ = separable_model
        perm = clf.TrainedModel(
            config=model.config,
            label_index=(model.label_index[1], model.label_index[0]),
            embeddings=model.embeddings,
            projection=model.projection[:, ::-1].copy(),
        )
        text = "abfe hcda gbge"
        orig = predict(model, text)
        swapped = predict(perm, text)
        for label in model.label_index:
            assert swapped[label] == pytest.approx(orig[label], abs=1e-12)


class TestEvaluate:
    def test_all_correct_gives_micro_one(self, separable_model):
        model, split = separable_model
        report = evaluate(model, split.test)
        assert report.micro_f1 == 1.0

    def test_degenerate_predictor_hand_computed(self):
        # all-zero model always argmaxes the first label ("a")
        model = zero_model(["a", "b"])
        test = [Example(f"v{i}", f"text {i}", "a", frozenset({"a"})) for i in range(5)]
        test += [Example(f"w{i}", f"word {i}", "b", frozenset({"b"})) for i in range(5)]
        report = evaluate(model, test)
        assert report.micro_f1 == pytest.approx(0.5)
        assert report.macro_f1 == pytest.approx(1 / 3)
        assert report.per_class["a"].precision == pytest.approx(0.5)
        assert report.per_class["a"].recall == pytest.approx(1.0)
        assert report.per_class["b"].f1 == 0.0

    def test_supports_sum_to_test_size(self, separable_model):
        model, split = separable_model
        report = evaluate(model, split.test)
        assert sum(m.support for m in report.per_class.values()) == len(split.test)

    def test_multi_label_example_accepts_any_gold_label(self):
        model = zero_model(["a", "b"])  # always predicts "a"
        test = [Example("v", "egal was", "b", frozenset({"a", "b"}))]
        report = evaluate(model, test)
        assert report.micro_f1 == 1.0

    def test_empty_test_set(self, separable_model):
        model, _ = separable_model
        with pytest.raises(EmptyTestSet):
            evaluate(model, [])


class TestSerialization:
    def test_magic_and_round_trip_predictions(self, separable_model):
        model, _ = separable_model
        blob = serialize_model(model)
        assert blob[:4] == b"DLG1"
        loaded = load_model(blob)
        rng = np.random.default_rng(55)
        letters = list("abcdqrstuv ")
        for _ in range(100):
            text = "".join(rng.choice(letters, size=rng.integers(0, 25)))
            assert predict(loaded, text) == predict(model, text)

    def test_byte_size_matches_exact_precomputation(self, separable_model):
        model, _ = separable_model
        assert model.byte_size == len(serialize_model(model))
        assert model.byte_size == serialized_size(model.config, model.label_index)

    def test_load_from_file(self, separable_model, tmp_path):
        model, _ = separable_model
        path = tmp_path / "m.bin"
        path.write_bytes(serialize_model(model))
        loaded = load_model(path)
        assert loaded.label_index == model.label_index
        assert loaded.config == model.config

    def test_bad_magic_rejected(self):
        with pytest.raises(ValueError):
            load_model(b"NOPE" + b"\x00" * 64)

    def test_version_is_content_addressed(self, separable_model, separable_view):
        model, _ = separable_model
        split = split_train_test(separable_view, seed=9)
        other = train(split.train, ModelConfig(epochs=2, seed=1))
        assert model.version != other.version
        assert load_model(serialize_model(model)).version == model.version


class TestAutotune:
    def test_respects_size_cap(self, separable_view):
        result = autotune(separable_view, max_model_bytes=2_097_152, max_candidates=3,
                          seed=7)
        assert result.model.byte_size <= 2_097_152
        assert result.candidates_tried == 3

    def test_separable_corpus_scores_high(self, separable_view):
        result = autotune(separable_view, max_candidates=2, seed=1)
        assert result.report.micro_f1 >= 0.95

    def test_impossible_cap(self, separable_view):
        with pytest.raises(NoFeasibleModel):
            autotune(separable_view, max_model_bytes=1, max_candidates=2, seed=0)

    def test_count_budget_is_deterministic(self, separable_view):
        a = autotune(separable_view, max_candidates=4, seed=13)
        b = autotune(separable_view, max_candidates=4, seed=13)
        assert a.config == b.config
        assert serialize_model(a.model) == serialize_model(b.model)

    def test_single_label_corpus_rejected(self):
        view = make_view({"aa": synthetic_texts("abcd", 6, seed=8)})
        with pytest.raises(SingleClassCorpus):
            autotune(view, max_candidates=1, seed=0)

    def test_time_budget_returns_at_least_minimal(self, separable_view):
        result = autotune(separable_view, time_budget_s=0.010, seed=3)
        assert result.candidates_tried >= 1
        assert result.report.micro_f1 > 0

    def test_requires_some_budget(self, separable_view):
        with pytest.raises(ValueError):
            autotune(separable_view, seed=0)
