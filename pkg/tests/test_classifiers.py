import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ser.classifiers import (
    ClassifierConfig,
    Dataset,
    KnnModel,
    MlpModel,
    fit_classifier,
    knn_predict,
    knn_predict_batch,
    mlp_backprop_step,
    mlp_forward,
    mlp_gradients,
    mlp_init,
    mlp_loss,
    mlp_train,
    standardize_apply,
    standardize_fit,
)
from ser.errors import DataError, UsageError


def blobs(n=100, margin=2.0, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(scale=0.5, size=(n, 2))
    X[:, 0] += np.where(y == 1, margin, -margin)
    return Dataset(X, y, 2)


def brute_knn(train_X, train_y, q, k, C):
    """Plain-python nearest neighbours with the documented tie rules."""
    d = [(float(np.sum((x - q) ** 2)), int(l)) for x, l in zip(train_X, train_y)]
    d.sort()
    top = d[:k]
    votes = [sum(1 for _, l in top if l == c) for c in range(C)]
    best = max(votes)
    cands = [c for c in range(C) if votes[c] == best]
    nearest = {c: min(dd for dd, l in top if l == c) for c in cands}
    winner = min(cands, key=lambda c: (nearest[c], c))
    return winner, np.array(votes) / k


class TestDataset:
    def test_validation(self):
        with pytest.raises(DataError):
            Dataset(np.zeros((2, 3)), [0, 5], 2)
        with pytest.raises(DataError):
            Dataset(np.zeros((2, 3)), [0], 2)
        with pytest.raises(DataError):
            Dataset([[np.nan]], [0], 1)

    def test_columns_and_subset(self):
        d = Dataset(np.arange(12.0).reshape(3, 4), [0, 1, 0], 2)
        assert d.columns([True, False, True, False]).rows.shape == (3, 2)
        np.testing.assert_array_equal(d.subset([2]).rows, [[8, 9, 10, 11]])


class TestStandardizer:
    def test_two_point(self):
        d = Dataset([[1.0], [3.0]], [0, 1], 2)
        s = standardize_fit(d)
        assert s.means[0] == 2 and s.stds[0] == 1
        np.testing.assert_array_equal(standardize_apply(s, d).rows.ravel(), [-1, 1])

    def test_constant_column(self):
        d = Dataset([[5.0, 1], [5.0, 2], [5.0, 3]], [0, 0, 0], 1)
        s = standardize_fit(d)
        assert s.stds[0] == 1
        np.testing.assert_array_equal(s.apply(d).rows[:, 0], 0)

    def test_train_statistics_only(self):
        train = Dataset([[0.0], [2.0]], [0, 0], 1)
        z = standardize_fit(train).apply(np.array([[10.0]]))
        assert z[0, 0] == pytest.approx(9.0)


class TestKnn:
    def test_exact_match(self):
        d = Dataset([[0.0, 0], [5, 5]], [0, 1], 2)
        label, scores = knn_predict(KnnModel(d, 1), [5, 5])
        assert label == 1 and scores[1] == 1.0

    def test_vote_fractions(self):
        d = Dataset([[0.0], [0.1], [0.2], [9]], [0, 0, 1, 1], 2)
        label, scores = knn_predict(KnnModel(d, 3), [0.0])
        assert label == 0
        np.testing.assert_allclose(scores, [2 / 3, 1 / 3])

    def test_tie_goes_to_nearer_member(self):
        d = Dataset([[1.0], [-2.0]], [1, 0], 2)
        assert knn_predict(KnnModel(d, 2), [0.0])[0] == 1

    def test_full_tie_goes_to_lowest_id(self):
        d = Dataset([[1.0], [-1.0]], [1, 0], 2)
        assert knn_predict(KnnModel(d, 2), [0.0])[0] == 0

    @given(st.integers(0, 10 ** 6), st.integers(1, 7))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, seed, k):
        rng = np.random.default_rng(seed)
        # small integer grid so distance ties actually occur
        X = rng.integers(-2, 3, size=(15, 2)).astype(float)
        y = rng.integers(0, 3, size=15)
        Q = rng.integers(-2, 3, size=(6, 2)).astype(float)
        preds, scores = knn_predict_batch(KnnModel(Dataset(X, y, 3), k), Q)
        for q, p, s in zip(Q, preds, scores):
            bl, bs = brute_knn(X, y, q, k, 3)
            assert p == bl
            np.testing.assert_allclose(s, bs)

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=20, deadline=None)
    def test_invariances(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(20, 3))
        y = rng.integers(0, 3, size=20)
        Q = rng.normal(size=(5, 3))
        base = knn_predict_batch(KnnModel(Dataset(X, y, 3), 5), Q)[0]
        perm = rng.permutation(20)
        permuted = knn_predict_batch(KnnModel(Dataset(X[perm], y[perm], 3), 5), Q)[0]
        shift = rng.normal(size=3) * 0.5
        shifted = knn_predict_batch(KnnModel(Dataset(X + shift, y, 3), 5), Q + shift)[0]
        np.testing.assert_array_equal(base, permuted)
        np.testing.assert_array_equal(base, shifted)


class TestMlp:
    def test_forward_is_distribution(self):
        m = mlp_init([6, 5, 5, 3], seed=1)
        P = mlp_forward(m, np.random.default_rng(0).normal(size=(10, 6)) * 5)
        assert P.shape == (10, 3)
        assert np.all(P >= 0)
        np.testing.assert_allclose(P.sum(axis=1), 1.0)

    def test_zero_weights_uniform(self):
        m = mlp_init([4, 5, 5, 3])
        m.weights = [np.zeros_like(w) for w in m.weights]
        np.testing.assert_allclose(mlp_forward(m, np.ones(4)), [1 / 3] * 3)

    @pytest.mark.parametrize("seed", range(3))
    def test_gradient_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        m = mlp_init([6, 5, 5, 3], seed=seed)
        m.biases = [rng.normal(scale=0.1, size=b.shape) for b in m.biases]
        X = rng.normal(size=(8, 6))
        y = rng.integers(0, 3, size=8)
        _, gw, gb = mlp_gradients(m, X, y)
        h = 1e-5
        for params, grads in ((m.weights, gw), (m.biases, gb)):
            for P, G in zip(params, grads):
                for idx in np.ndindex(P.shape):
                    old = P[idx]
                    P[idx] = old + h
                    up = mlp_loss(m, X, y)
                    P[idx] = old - h
                    down = mlp_loss(m, X, y)
                    P[idx] = old
                    num = (up - down) / (2 * h)
                    assert abs(num - G[idx]) <= 1e-4 * max(1.0, abs(num) + abs(G[idx]))

    def test_zero_step_is_noop(self):
        m = mlp_init([2, 5, 5, 2], seed=0)
        d = blobs()
        out, _ = mlp_backprop_step(m, d.rows, d.labels, lr=0.0)
        for a, b in zip(out.weights + out.biases, m.weights + m.biases):
            np.testing.assert_array_equal(a, b)

    def test_small_step_descends(self):
        m = mlp_init([2, 5, 5, 2], seed=0)
        d = blobs()
        out, before = mlp_backprop_step(m, d.rows, d.labels, lr=1e-3)
        assert mlp_loss(out, d.rows, d.labels) < before

    def test_zero_epochs(self):
        m = mlp_init([2, 5, 5, 2], seed=0)
        out, hist = mlp_train(m, blobs(), epochs=0)
        assert hist == [] and out is m

    def test_blobs_separable(self):
        d = blobs()
        m, hist = mlp_train(mlp_init([2, 5, 5, 2], seed=0), d, epochs=200, batch_size=16, lr=0.01, seed=0)
        acc = np.mean(mlp_forward(m, d.rows).argmax(axis=1) == d.labels)
        assert acc >= 0.95
        assert hist[-1] < hist[0]

    def test_deterministic_history(self):
        d = blobs()
        h1 = mlp_train(mlp_init([2, 5, 5, 2], seed=3), d, epochs=20, seed=5)[1]
        h2 = mlp_train(mlp_init([2, 5, 5, 2], seed=3), d, epochs=20, seed=5)[1]
        assert h1 == h2

    def test_json_roundtrip(self):
        m = mlp_init([3, 5, 5, 2], seed=2)
        back = MlpModel.from_json(m.to_json())
        x = np.random.default_rng(0).normal(size=(4, 3))
        np.testing.assert_array_equal(mlp_forward(back, x), mlp_forward(m, x))


class TestFrontEnd:
    def test_unknown_kind(self):
        with pytest.raises(UsageError):
            ClassifierConfig(kind="svm")

    @pytest.mark.parametrize("kind", ["knn", "mlp"])
    def test_fit_predict_shapes(self, kind):
        d = blobs()
        clf = fit_classifier(ClassifierConfig(kind=kind, epochs=50), d, seed=0)
        labels, scores = clf.predict(d.rows[:7])
        assert labels.shape == (7,) and scores.shape == (7, 2)
        assert np.mean(clf.predict(d.rows)[0] == d.labels) > 0.9

    def test_k_capped_by_training_size(self):
        d = Dataset([[0.0], [1.0]], [0, 1], 2)
        assert fit_classifier(ClassifierConfig(k=5), d).model.k == 2
