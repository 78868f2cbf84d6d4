import math

import numpy as np
import pytest

from deferkit import hidden
from deferkit.errors import (
    DimensionMismatch,
    EmptyBatch,
    EmptySequence,
    SingleClassError,
)
from deferkit.hidden import TrainConfig


def make_gaussian_fixture(n=200, d=8, seed=0, margin=4.0):
    """Two well-separated Gaussian clusters; nearest-centroid separates them
    perfectly at this margin."""
    rng = np.random.default_rng(seed)
    half = n // 2
    neg = rng.normal(-margin / 2, 1.0, size=(half, d))
    pos = rng.normal(margin / 2, 1.0, size=(n - half, d))
    xs = np.concatenate([neg, pos])
    ys = [0] * half + [1] * (n - half)
    order = rng.permutation(n)
    return [(xs[i], ys[i]) for i in order]


def nearest_centroid_accuracy(train_set, test_set):
    xs = np.asarray([x for x, _ in train_set])
    ys = np.asarray([y for _, y in train_set])
    c0 = xs[ys == 0].mean(axis=0)
    c1 = xs[ys == 1].mean(axis=0)
    hits = 0
    for x, y in test_set:
        pred = 1 if np.linalg.norm(x - c1) < np.linalg.norm(x - c0) else 0
        hits += pred == y
    return hits / len(test_set)


class TestPooling:
    def test_single_row_identity(self):
        out = hidden.pool_hidden_states([[1.0, 2.0, 3.0]])
        assert np.allclose(out, [1.0, 2.0, 3.0])

    def test_arithmetic_mean(self):
        out = hidden.pool_hidden_states([[1.0, 3.0], [3.0, 5.0]])
        assert np.allclose(out, [2.0, 4.0])

    def test_zero_rows(self):
        out = hidden.pool_hidden_states(np.zeros((5, 3)))
        assert np.allclose(out, np.zeros(3))

    def test_empty_sequence(self):
        with pytest.raises(EmptySequence):
            hidden.pool_hidden_states(np.zeros((0, 3)))

    def test_linearity(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((4, 6))
        b = rng.standard_normal((4, 6))
        lhs = hidden.pool_hidden_states(2.5 * a + (-1.25) * b)
        rhs = 2.5 * hidden.pool_hidden_states(a) - 1.25 * hidden.pool_hidden_states(b)
        assert np.allclose(lhs, rhs, atol=1e-12)


class TestPredict:
    def test_zero_parameters_give_half(self):
        clf = hidden.HiddenClassifier(
            w1=np.zeros((3, 4)), b1=np.zeros(3), w2=np.zeros(3), b2=0.0
        )
        assert hidden.predict(clf, np.zeros(4)) == 0.5

    def test_strictly_inside_unit_interval(self):
        clf = hidden.HiddenClassifier(
            w1=np.full((3, 4), 100.0), b1=np.full(3, 100.0),
            w2=np.full(3, 1e6), b2=1e6,
        )
        p = hidden.predict(clf, np.full(4, 1e3))
        assert 0.0 < p < 1.0
        clf.w2 = -clf.w2
        clf.b2 = -clf.b2
        p = hidden.predict(clf, np.full(4, 1e3))
        assert 0.0 < p < 1.0

    def test_dimension_mismatch(self):
        clf = hidden.init_classifier(4, 3, seed=0)
        with pytest.raises(DimensionMismatch):
            hidden.predict(clf, np.zeros(5))


class TestGradient:
    def finite_difference(self, clf, batch, l2, step=1e-5):
        """Central-difference oracle over every parameter."""
        grads = {}
        for name in ("w1", "b1", "w2", "b2"):
            value = getattr(clf, name)
            if name == "b2":
                setattr(clf, name, value + step)
                up, _ = hidden.loss_and_gradient(clf, batch, l2)
                setattr(clf, name, value - step)
                down, _ = hidden.loss_and_gradient(clf, batch, l2)
                setattr(clf, name, value)
                grads[name] = (up - down) / (2 * step)
                continue
            grad = np.zeros_like(value)
            flat = value.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                up, _ = hidden.loss_and_gradient(clf, batch, l2)
                flat[i] = orig - step
                down, _ = hidden.loss_and_gradient(clf, batch, l2)
                flat[i] = orig
                grad.ravel()[i] = (up - down) / (2 * step)
            grads[name] = grad
        return grads

    def max_relative_error(self, analytic, numeric):
        errs = []
        for name in analytic:
            a = np.asarray(analytic[name], dtype=float).ravel()
            n = np.asarray(numeric[name], dtype=float).ravel()
            scale = np.maximum(np.abs(a) + np.abs(n), 1e-3)
            errs.append(np.max(np.abs(a - n) / scale))
        return max(errs)

    def test_balanced_batch_zero_parameters_loss_ln2(self):
        clf = hidden.HiddenClassifier(
            w1=np.zeros((3, 4)), b1=np.zeros(3), w2=np.zeros(3), b2=0.0
        )
        batch = [(np.ones(4), 0), (np.ones(4), 1)]
        loss, _ = hidden.loss_and_gradient(clf, batch)
        assert abs(loss - math.log(2)) < 1e-9

    def test_saturated_point_near_zero_loss(self):
        clf = hidden.HiddenClassifier(
            w1=np.ones((2, 2)), b1=np.zeros(2), w2=np.full(2, 20.0), b2=0.0
        )
        loss, _ = hidden.loss_and_gradient(clf, [(np.ones(2), 1)])
        assert loss < 1e-6

    def test_empty_batch(self):
        clf = hidden.init_classifier(2, 2, seed=0)
        with pytest.raises(EmptyBatch):
            hidden.loss_and_gradient(clf, [])

    def test_gradient_matches_finite_differences_many_configs(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(100):
            d = int(rng.integers(1, 9))
            h = int(rng.integers(1, 5))
            clf = hidden.init_classifier(d, h, seed=int(rng.integers(1 << 30)))
            clf.w1 += 0.3 * rng.standard_normal(clf.w1.shape)
            clf.w2 += 0.3 * rng.standard_normal(clf.w2.shape)
            clf.b1 = 0.2 * rng.standard_normal(h)
            clf.b2 = float(0.2 * rng.standard_normal())
            n = int(rng.integers(1, 6))
            batch = [
                (rng.standard_normal(d), int(rng.integers(0, 2))) for _ in range(n)
            ]
            l2 = float(rng.choice([0.0, 0.01]))
            _, analytic = hidden.loss_and_gradient(clf, batch, l2)
            numeric = self.finite_difference(clf, batch, l2)
            worst = max(worst, self.max_relative_error(analytic, numeric))
        assert worst < 1e-4, worst


class TestTrain:
    def test_separable_fixture_holdout_accuracy(self):
        data = make_gaussian_fixture(n=300, d=8, seed=5)
        train_set, test_set = data[:200], data[200:]
        assert nearest_centroid_accuracy(train_set, test_set) == 1.0  # oracle
        clf = hidden.train(train_set, TrainConfig(learning_rate=0.5, epochs=300, seed=0),
                           hidden_width=16)
        hits = sum(
            (hidden.predict(clf, x) >= 0.5) == y for x, y in test_set
        )
        assert hits / len(test_set) >= 0.95

    def test_positive_centroid_confident(self):
        data = make_gaussian_fixture(n=200, d=8, seed=2)
        clf = hidden.train(data, TrainConfig(learning_rate=0.5, epochs=300, seed=0),
                           hidden_width=16)
        xs = np.asarray([x for x, _ in data])
        ys = np.asarray([y for _, y in data])
        centroid = xs[ys == 1].mean(axis=0)
        assert hidden.predict(clf, centroid) > 0.9

    def test_zero_learning_rate_keeps_init(self):
        data = make_gaussian_fixture(n=20, d=4, seed=3)
        clf = hidden.train(data, TrainConfig(learning_rate=0.0, epochs=5, seed=9),
                           hidden_width=4)
        init = hidden.init_classifier(4, 4, seed=9)
        assert np.array_equal(clf.w1, init.w1)
        assert np.array_equal(clf.w2, init.w2)

    def test_same_seed_bitwise_identical(self):
        data = make_gaussian_fixture(n=40, d=4, seed=4)
        cfg = TrainConfig(learning_rate=0.2, epochs=50, seed=13)
        a = hidden.train(data, cfg, hidden_width=8)
        b = hidden.train(data, cfg, hidden_width=8)
        assert np.array_equal(a.w1, b.w1) and np.array_equal(a.b1, b.b1)
        assert np.array_equal(a.w2, b.w2) and a.b2 == b.b2

    def test_full_batch_loss_non_increasing(self):
        data = make_gaussian_fixture(n=60, d=4, seed=6)
        clf = hidden.init_classifier(4, 8, seed=1)
        cfg = TrainConfig(learning_rate=0.05, epochs=1, seed=1)
        losses = []
        for _ in range(80):
            loss, _ = hidden.loss_and_gradient(clf, data)
            losses.append(loss)
            grads = hidden.loss_and_gradient(clf, data)[1]
            clf.w1 = clf.w1 - cfg.learning_rate * grads["w1"]
            clf.b1 = clf.b1 - cfg.learning_rate * grads["b1"]
            clf.w2 = clf.w2 - cfg.learning_rate * grads["w2"]
            clf.b2 = clf.b2 - cfg.learning_rate * grads["b2"]
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_single_class_rejected(self):
        data = [(np.zeros(3), 0), (np.ones(3), 0)]
        with pytest.raises(SingleClassError):
            hidden.train(data, TrainConfig())


class TestPersistence:
    def test_save_load_round_trip(self, tmp_path):
        data = make_gaussian_fixture(n=40, d=4, seed=8)
        clf = hidden.train(data, TrainConfig(learning_rate=0.2, epochs=20, seed=3),
                           hidden_width=5)
        path = tmp_path / "clf.txt"
        hidden.save_classifier(clf, path)
        loaded = hidden.load_classifier(path)
        assert np.array_equal(clf.w1, loaded.w1)
        assert np.array_equal(clf.b1, loaded.b1)
        assert np.array_equal(clf.w2, loaded.w2)
        assert clf.b2 == loaded.b2
        assert (loaded.seed, loaded.epochs) == (3, 20)
