from __future__ import annotations

import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hostile_posts.errors import DataError, TrainingError
from hostile_posts.learners import (
    ExternalScores,
    MlpConfig,
    MlpModel,
    NgramConfig,
    NgramLinearModel,
    SvmConfig,
    SvmModel,
    balanced_weights,
    classifier_from_dict,
    gamma_scale,
    sigmoid,
    train_mlp,
    train_ngram_linear,
    train_svm,
)
from hostile_posts.learners.mlp import init_params, loss_and_grads, softmax
from hostile_posts.learners.ngram import NgramVectorizer, extract_ngrams, smooth_idf


def blobs(rng, n=200, sep=2.0):
    y = np.repeat([0, 1], n // 2)
    X = rng.normal(0.0, 1.0, size=(n, 2)) + np.where(y[:, None] == 1, sep, -sep)
    return X, y


# --- balanced weights / gamma ----------------------------------------------------

def test_balanced_weights_examples():
    w0, w1 = balanced_weights([1, 1, 1, 0])
    assert w1 == pytest.approx(2 / 3) and w0 == 2.0
    assert balanced_weights([1, 0]) == (1.0, 1.0)
    w0, w1 = balanced_weights([1] * 376 + [0] * 435)
    assert w1 == 811 / 752 and w0 == 811 / 870
    assert round(w1, 4) == 1.0785 and round(w0, 4) == 0.9322


def test_balanced_weights_single_class():
    with pytest.raises(TrainingError):
        balanced_weights([1, 1])


def test_gamma_scale_examples():
    assert gamma_scale([[0.0], [2.0]]) == 1.0
    assert gamma_scale([[0.0, 0.0], [2.0, 2.0]]) == 0.5
    with pytest.raises(TrainingError):
        gamma_scale([[1.0, 1.0], [1.0, 1.0]])


# --- SVM ---------------------------------------------------------------------------

def test_svm_linear_toy_closed_form():
    model = train_svm([[-1.0], [1.0]], [0, 1], SvmConfig(kernel="linear", C=1.0))
    assert model.weights[0] == pytest.approx(1.0, abs=1e-3)
    assert model.bias == pytest.approx(0.0, abs=1e-3)


XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([0, 0, 1, 1])


def test_svm_xor_rbf_but_not_linear():
    rbf = train_svm(XOR_X, XOR_Y, SvmConfig(kernel="rbf", C=10.0))
    assert (rbf.predict(XOR_X) == XOR_Y).all()
    linear = train_svm(XOR_X, XOR_Y, SvmConfig(kernel="linear", C=10.0))
    assert (linear.predict(XOR_X) == XOR_Y).mean() < 1.0
    # brute-force oracle: no line over a grid of directions/offsets separates XOR
    angles = np.linspace(0, 2 * np.pi, 360, endpoint=False)
    for a in angles:
        proj = XOR_X @ np.array([np.cos(a), np.sin(a)])
        for b in np.linspace(-2, 2, 81):
            assert not (((proj + b) >= 0).astype(int) == XOR_Y).all()


def test_svm_objective_non_decreasing_and_kkt(rng):
    X, y = blobs(rng, 120, sep=0.7)
    cfg = SvmConfig()
    model = train_svm(X, y, cfg)
    h = model.objective_history
    assert len(h) > 2
    assert np.all(np.diff(h) >= -1e-12)
    assert model.converged and model.kkt_gap <= cfg.tol
    w0, w1 = model.class_weights
    bound = cfg.C * np.where(model.dual_coef > 0, w1, w0)
    assert np.all(np.abs(model.dual_coef) <= bound + 1e-12)


def test_svm_duplication_equals_double_weight(rng):
    X, y = blobs(rng, 60, sep=0.6)
    keep = np.concatenate([np.flatnonzero(y == 0), np.flatnonzero(y == 1)[:10]])
    X, y = X[keep], y[keep]
    cfg_dup = SvmConfig(kernel="linear", class_weight=None, tol=1e-6)
    X_dup = np.vstack([X, X[y == 1]])
    y_dup = np.concatenate([y, y[y == 1]])
    dup = train_svm(X_dup, y_dup, cfg_dup)
    weighted = train_svm(X, y, SvmConfig(kernel="linear", class_weight=(1.0, 2.0), tol=1e-6))
    np.testing.assert_allclose(dup.weights, weighted.weights, atol=1e-3)
    assert dup.bias == pytest.approx(weighted.bias, abs=1e-3)


def test_svm_order_invariant_support_set(rng):
    X, y = blobs(rng, 40, sep=1.0)
    cfg = SvmConfig(kernel="linear", tol=1e-6)
    a = train_svm(X, y, cfg)
    perm = rng.permutation(len(X))
    b = train_svm(X[perm], y[perm], cfg)
    rows = lambda m: sorted(map(tuple, np.round(m.support_vectors, 12)))
    assert rows(a) == rows(b)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-5)


def test_svm_symmetric_problem_zero_bias():
    # margin points are -1 and +1, so the max-margin line is x = 0 with w = 1
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    model = train_svm(X, [0, 0, 1, 1], SvmConfig(kernel="linear", tol=1e-8))
    assert model.weights[0] == pytest.approx(1.0, abs=1e-6)
    assert model.bias == pytest.approx(0.0, abs=1e-6)


def test_svm_nonconvergence_warns(rng):
    X, y = blobs(rng, 80, sep=0.3)
    with pytest.warns(RuntimeWarning, match="SMO stopped"):
        model = train_svm(X, y, SvmConfig(max_passes=2))
    assert not model.converged


def test_svm_rejects_non_finite():
    with pytest.raises(TrainingError, match="non-finite"):
        train_svm([[0.0], [np.nan]], [0, 1])


def test_svm_roundtrip(rng):
    X, y = blobs(rng, 50)
    for kernel in ("linear", "rbf"):
        model = train_svm(X, y, SvmConfig(kernel=kernel))
        again = classifier_from_dict(json.loads(json.dumps(model.to_dict())))
        assert isinstance(again, SvmModel)
        np.testing.assert_array_equal(again.score(X), model.score(X))


# --- MLP ---------------------------------------------------------------------------

def test_softmax_example():
    np.testing.assert_array_equal(softmax(np.array([0.0, 0.0])), [0.5, 0.5])
    p = softmax(np.array([[1000.0, -1000.0], [3.0, 1.0]]))
    np.testing.assert_allclose(p.sum(axis=1), 1.0)


def test_mlp_gradient_check():
    rng = np.random.default_rng(0)
    worst = 0.0
    for draw in range(20):
        d, h = 4, 6
        params = init_params(d, h, rng)
        params = {k: v + rng.normal(0, 0.3, v.shape) for k, v in params.items()}
        X = rng.normal(size=(5, d))
        y = rng.integers(0, 2, size=5)
        sw = rng.uniform(0.5, 2.0, size=5) if draw % 2 else None
        _, grads = loss_and_grads(params, X, y, sw)
        eps = 1e-5
        for name, value in params.items():
            it = np.nditer(value, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = value[idx]
                value[idx] = orig + eps
                lp, _ = loss_and_grads(params, X, y, sw)
                value[idx] = orig - eps
                lm, _ = loss_and_grads(params, X, y, sw)
                value[idx] = orig
                numeric = (lp - lm) / (2 * eps)
                analytic = grads[name][idx]
                denom = max(abs(numeric), abs(analytic), 1e-7)
                worst = max(worst, abs(numeric - analytic) / denom)
    assert worst < 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mlp_blobs_default_schedule(seed):
    X, y = blobs(np.random.default_rng(100 + seed))
    model = train_mlp(X, y, MlpConfig(epochs=10, lr=1e-3, batch=4), seed=seed)
    assert (model.predict(X) == y).mean() >= 0.95
    assert len(model.epoch_losses) == 10
    assert len(model.loss_history) == 10 * 50


def test_mlp_loss_decreases_over_first_epoch():
    X, y = blobs(np.random.default_rng(7))
    cfg = MlpConfig(epochs=1)
    before = loss_and_grads(init_params(2, cfg.hidden, np.random.default_rng(3)), X, y)[0]
    model = train_mlp(X, y, cfg, seed=3)
    after = loss_and_grads(model.params, X, y)[0]
    assert after < before


def test_mlp_deterministic_and_roundtrip():
    X, y = blobs(np.random.default_rng(5), 40)
    a = train_mlp(X, y, seed=11)
    b = train_mlp(X, y, seed=11)
    np.testing.assert_array_equal(a.W1, b.W1)
    again = classifier_from_dict(json.loads(json.dumps(a.to_dict())))
    assert isinstance(again, MlpModel)
    np.testing.assert_array_equal(again.score(X), a.score(X))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_mlp_nan_loss_aborts():
    X = np.array([[1e308, 1e308], [-1e308, -1e308]])
    with pytest.raises(TrainingError):
        train_mlp(X, [0, 1], MlpConfig(lr=1e10, epochs=3, batch=1), seed=0)


def test_mlp_softmax_rows_sum_to_one():
    X, y = blobs(np.random.default_rng(2), 20)
    model = train_mlp(X, y, seed=0)
    np.testing.assert_allclose(model.softmax(X).sum(axis=1), 1.0)


# --- n-gram linear ------------------------------------------------------------------

def test_idf_shared_term_is_one():
    idf = smooth_idf(np.array([2]), 2)
    assert idf[0] == pytest.approx(math.log(3 / 3) + 1)
    vec = NgramVectorizer.fit(["अ ब", "अ स"], NgramConfig(char_ngrams=(0, 0), word_ngrams=(1, 1)))
    assert vec.idf[vec.features.index("w:अ")] == 1.0


def test_ngram_features():
    grams = extract_ngrams("Ab  cd", (1, 2), (2, 2))
    assert {"w:ab", "w:cd", "w:ab cd", "c:ab", "c:b ", "c: c", "c:cd"} <= set(grams)


def _keyword_corpus(rng, n):
    filler = ["खबर", "आज", "लोग", "सरकार", "मौसम", "बाजार", "खेल", "शहर"]
    texts, y = [], []
    for _ in range(n):
        words = list(rng.choice(filler, size=rng.integers(3, 8)))
        label = int(rng.random() < 0.5)
        if label:
            words.insert(int(rng.integers(len(words) + 1)), "झूठ")
        texts.append(" ".join(words))
        y.append(label)
    return texts, np.array(y)


def test_ngram_keyword_separable():
    rng = np.random.default_rng(9)
    texts, y = _keyword_corpus(rng, 300)
    model = train_ngram_linear(texts[:200], y[:200])
    assert (model.predict(texts[200:]) == y[200:]).mean() >= 0.95


def test_ngram_empty_text_scores_bias():
    model = train_ngram_linear(["झूठ खबर", "सच खबर", "झूठ", "सच"], [1, 0, 1, 0])
    assert model.score([""])[0] == model.bias
    assert model.vectorizer.transform([""]).nnz == 0


def test_ngram_errors():
    with pytest.raises(TrainingError):
        train_ngram_linear([], [])
    with pytest.raises(TrainingError):
        train_ngram_linear(["", " "], [0, 1], NgramConfig(char_ngrams=(0, 0)))


def test_ngram_rows_l2_normalized():
    vec = NgramVectorizer.fit(["झूठ खबर", "सच"], NgramConfig())
    X = vec.transform(["झूठ खबर झूठ", "सच सच"])
    np.testing.assert_allclose(np.sqrt(X.multiply(X).sum(axis=1)).A1, 1.0)


def test_ngram_roundtrip():
    texts, y = _keyword_corpus(np.random.default_rng(1), 60)
    model = train_ngram_linear(texts, y)
    again = classifier_from_dict(json.loads(json.dumps(model.to_dict())))
    assert isinstance(again, NgramLinearModel)
    np.testing.assert_array_equal(again.score(texts), model.score(texts))


# --- sigmoid / consistency ------------------------------------------------------------

def test_sigmoid_examples():
    assert sigmoid(np.array([0.0]))[0] == 0.5
    big = sigmoid(np.array([800.0, -800.0]))
    assert big[0] == 1.0 and big[1] == 0.0


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=20))
def test_sigmoid_monotone_and_aligned(scores):
    s = np.sort(np.array(scores))
    p = sigmoid(s)
    assert np.all(np.diff(p) >= 0)
    assert np.array_equal(p >= 0.5, s >= 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_backend_threshold_consistency(seed):
    rng = np.random.default_rng(seed)
    X, y = blobs(rng, 40, sep=0.5)
    probe = rng.normal(0, 1.5, size=(30, 2))
    models = [train_svm(X, y, SvmConfig(kernel=k)) for k in ("linear", "rbf")]
    models.append(train_mlp(X, y, MlpConfig(epochs=2), seed=seed))
    for m in models:
        s, p, d = m.score(probe), m.prob(probe), m.predict(probe)
        assert np.array_equal(d == 1, p >= 0.5)
        assert np.array_equal(d == 1, s >= 0)
    texts, ty = _keyword_corpus(rng, 30)
    ngram = train_ngram_linear(texts, ty)
    s, p, d = ngram.score(texts), ngram.prob(texts), ngram.predict(texts)
    assert np.array_equal(d == 1, p >= 0.5) and np.array_equal(d == 1, s >= 0)
    ids = [f"p{i}" for i in range(30)]
    ext = ExternalScores({i: float(v) for i, v in zip(ids, rng.uniform(size=30))} | {"half": 0.5})
    ids.append("half")
    s, p, d = ext.score(ids), ext.prob(ids), ext.predict(ids)
    assert np.array_equal(d == 1, p >= 0.5) and np.array_equal(d == 1, s >= 0)


# --- external scores --------------------------------------------------------------------

def test_external_returns_stored_value(tmp_path):
    path = tmp_path / "scores.tsv"
    path.write_text("a\t0.25\nb\t0.5\n", encoding="utf-8")
    ext = ExternalScores.from_file(path)
    np.testing.assert_array_equal(ext.prob(["a", "b"]), [0.25, 0.5])
    np.testing.assert_array_equal(ext.predict(["a", "b"]), [0, 1])
    with pytest.raises(DataError, match="'c'"):
        ext.prob(["c"])


def test_external_range_checked():
    with pytest.raises(DataError):
        ExternalScores({"a": 1.2})


def test_unknown_classifier_kind():
    from hostile_posts.errors import BundleError
    with pytest.raises(BundleError):
        classifier_from_dict({"kind": "forest"})


def test_svm_no_warning_when_converged(rng):
    X, y = blobs(rng, 30)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        train_svm(X, y)
